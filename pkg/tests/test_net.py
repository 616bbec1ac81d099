"""Diagram geometry: cuts, crossings, footprints, ownership replay."""

import random

import progen
from geotrace import net
from geotrace.execute import RunConfig, run, run_text


WORKED = ("globals { y = 3 @ u }\n"
         "t:(new x; x := c?; release x)\n"
         ">> u:(y := y + 1; acquire x; d!(x + y); dispose x)")


def worked():
    return run_text(WORKED, RunConfig(seed=0, channel_inputs={"c": (8,)},
                                     message_offset={"c": 83, "d": 36}))


def test_slice_boxes():
    d = worked()
    root, left, right = d.slices
    assert root.op == "chain" and root.orientation == net.VERTICAL
    assert (root.row_lo, root.row_hi, root.col_lo, root.col_hi) == (1, 6, 0, 5)
    assert (left.col_lo, left.col_hi) == (0, 2)
    assert (right.col_lo, right.col_hi) == (3, 5)
    # vertical split: both children keep the full row range
    assert (left.row_lo, left.row_hi) == (1, 6)
    assert (right.row_lo, right.row_hi) == (1, 6)


def test_footprints():
    d = worked()
    assert sorted(net.footprint(d, 0)) == [0, 1, 2, 3, 4, 5]
    assert sorted(net.footprint(d, 1)) == [0, 1, 2]
    assert sorted(net.footprint(d, 2)) == [3, 4, 5]


def test_crossing_arrows_external_edges():
    d = worked()
    left = net.crossing_arrows(d, 0, "left")
    right = net.crossing_arrows(d, 0, "right")
    top = net.crossing_arrows(d, 0, "top")
    bottom = net.crossing_arrows(d, 0, "bottom")
    assert len(left) == len(right) == 1
    assert d.arrows[left[0]].value == 8
    assert d.arrows[right[0]].value == 12
    # y enters with 3 and leaves with 4
    assert [d.arrows[a].value for a in top] == [3]
    assert [d.arrows[a].value for a in bottom] == [4]


def test_crossing_arrows_internal_edge():
    d = worked()
    inner = net.crossing_arrows(d, 0, "internal")
    # membership is ownership-aware, so the only child-to-child arrows are
    # the two feeding the handover transaction
    assert len(inner) == 2
    heads = {d.transactions[d.events[d.arrows[a].head].transaction].label
             for a in inner}
    assert heads == {"rel.1(x) / acq.2(x)"}
    assert all(d.arrows[a].value == 8 for a in inner)


def test_state_at_cut_all_edges():
    d = worked()
    assert net.state_at_cut(d, 0, "top") == {"y": 3}
    assert net.state_at_cut(d, 0, "bottom") == {"y": 4}
    assert net.state_at_cut(d, 0, "left") == {"c_[84]": 8}
    assert net.state_at_cut(d, 0, "right") == {"d_[37]": 12}
    assert net.state_at_cut(d, 1, "left") == {"c_[84]": 8}
    assert net.state_at_cut(d, 1, "top") == {}
    assert net.state_at_cut(d, 2, "top") == {"y": 3}
    assert net.state_at_cut(d, 2, "bottom") == {"y": 4}


def test_ownership_replay_follows_transfer():
    d = worked()
    owner, races = net.replay_ownership(d)
    assert races == []
    x = next(l for l in d.lifelines if l.name == "x")
    t = net.thread_by_name(d, "t")
    u = net.thread_by_name(d, "u")
    history = [(ev.kind, owner[ev.id]) for ev in d.events if ev.lifeline == x.id]
    assert history == [("alloc", t.id), ("write", t.id), ("release", u.id),
                       ("read", u.id), ("dispose", u.id)]


def test_child_of_event_is_ownership_aware():
    d = worked()
    owner, _ = net.replay_ownership(d)
    root = d.slices[0]
    x = next(l for l in d.lifelines if l.name == "x")
    per_row = {net.event_row(d, ev.id): net.child_of_event(d, root, ev.id, owner)
               for ev in d.events if ev.lifeline == x.id}
    # x lives in t's column group but its post-handover events belong to u's box
    assert per_row == {2: 1, 3: 1, 4: 2, 5: 2, 6: 2}


def test_message_serials_respect_offsets():
    d = worked()
    by_channel = {ch: serial for ch, serial in net.message_serials(d).values()}
    assert by_channel == {"c": 84, "d": 37}


def test_seq_children_share_edge_state():
    src = ("globals { g = 1 @ a }\n"
           "a:(g := g + 1; o!(g)) ; b:(skip; skip)")
    d = run_text(src, RunConfig(seed=0))
    assert d.violations == []
    root = d.slices[0]
    assert root.op == "seq" and root.orientation == net.HORIZONTAL
    kids = [d.slices[c] for c in root.children]
    upper, lower = sorted(kids, key=lambda s: s.row_lo)
    assert upper.row_hi + 1 == lower.row_lo
    assert net.state_at_cut(d, upper.id, "bottom") == \
        net.state_at_cut(d, lower.id, "top") == {"g": 2}


def test_seq_edge_agreement_small_corpus():
    rng = random.Random(23)
    pairs = 0
    for _ in range(80):
        prog, cfg = progen.race_free_program(rng)
        d = run(prog, RunConfig(seed=rng.randrange(50), **cfg))
        for sl in d.slices:
            if sl.op != "seq":
                continue
            upper, lower = sorted((d.slices[c] for c in sl.children),
                                  key=lambda s: s.row_lo)
            assert net.state_at_cut(d, upper.id, "bottom") == \
                net.state_at_cut(d, lower.id, "top")
            pairs += 1
    assert pairs > 10


def test_disposed_lifeline_has_no_bottom_state():
    d = run_text("t:(new x; x := 5; dispose x)", RunConfig(seed=0))
    assert d.violations == []
    assert net.state_at_cut(d, 0, "bottom") == {}
    assert net.state_at_cut(d, 0, "top") == {}


def test_live_local_reaches_bottom_edge():
    d = run_text("t:(new x; x := 5)", RunConfig(seed=0))
    assert [v.code for v in d.violations] == ["LEAKED_OBJECT"]
    assert net.state_at_cut(d, 0, "bottom") == {"x": 5}


def test_index_maps_heads_and_tails():
    d = worked()
    idx = d.index()
    for a in d.arrows:
        if a.tail is not None:
            assert a.id in idx.tails[a.tail]
        if a.head is not None:
            assert a.id in idx.heads[a.head]
    for line_id, eids in idx.by_lifeline.items():
        rows = [net.event_row(d, e) for e in eids]
        assert rows == sorted(rows)
        assert all(d.events[e].lifeline == line_id for e in eids)
