"""Seeded execution of parsed programs into trace diagrams.

The scheduler is deterministic: at each step the enabled moves are listed in
a canonical order (summed program counters, then thread names, then move
kind, then the touched name) and one is picked by hashing the seed and the
step counter, FNV-1a over both as eight big-endian bytes, reduced modulo the
list length.  Same program, same configuration, same diagram, byte for byte.

Moves are single commands, except that release/acquire pairs and send/
receive pairs on a channel both threads use fire together as one rendezvous
step.  A rendezvous needs the blessing of the operator where the two
threads' subtrees meet: ``|`` allows it outright, ``>>`` only when the data
flows from its left operand to its right, and ``|||`` never (that is the
point of interleaving: the parts may not talk).  Channels only one side of
the program uses face the environment instead: receives draw values from the
configured input feed and sends always go through.

A command that faults (bad arithmetic, a failed assert, touching an object
the thread does not own or that is gone) still takes its turn: the step is
recorded on the thread's own lifeline alone, the violation is logged, and
the thread stops for good.  Whatever is left of the system keeps running.
When nothing can move and work remains, the blocked threads are sorted into
a deadlocked cycle (each waiting for the next one's rendezvous) or plain
starvation.  Fresh objects hold 0 until first assigned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import net
from .checks import make_violation, _tarjan
from .lang import (
    CHAIN, PAR, SEQ,
    Acquire, Assert, Assign, Binary, Dispose, Input, Leaf, Lit, New,
    Output, Release, Skip, Var,
    expr_vars, leaves, parse, pretty_command,
)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def _fnv64(data):
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _MASK
    return h


def scheduler_choice(seed, step, k):
    """Index of the move fired at a step, in [0, k)."""
    data = (seed & _MASK).to_bytes(8, "big") + (step & _MASK).to_bytes(8, "big")
    return _fnv64(data) % k


@dataclass
class RunConfig:
    """Everything the environment contributes to a run.

    channel_inputs feeds the channels only ever received from; entries for
    other channels are ignored.  message_offset shifts the serial numbers
    stamped on a channel's messages, for splicing a run into a longer story.
    """

    seed: int = 0
    max_steps: int = 10000
    channel_inputs: dict = field(default_factory=dict)
    message_offset: dict = field(default_factory=dict)

    def __post_init__(self):
        # normalized so a serialization round trip compares equal
        self.channel_inputs = {ch: tuple(int(v) for v in vs)
                               for ch, vs in self.channel_inputs.items()}
        self.message_offset = {ch: int(n)
                               for ch, n in self.message_offset.items()}


class RuntimeFault(Exception):
    def __init__(self, code, detail, span):
        super().__init__(detail)
        self.code = code
        self.detail = detail
        self.span = span


def _trunc_div(a, b, span):
    if b == 0:
        raise RuntimeFault("ZERO_DIVIDE", "division by zero", span)
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def evaluate(expr, read):
    """Evaluate with read(name, span) supplying variable values.

    Comparisons yield 1 or 0; division truncates toward zero and raises
    RuntimeFault on a zero divisor.
    """
    match expr:
        case Lit(value=v):
            return v
        case Var(name=n, span=s):
            return read(n, s)
        case Binary(op=op, left=l, right=r, span=s):
            a = evaluate(l, read)
            b = evaluate(r, read)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return _trunc_div(a, b, s)
            if op == "=":
                return int(a == b)
            if op == "!=":
                return int(a != b)
            if op == "<":
                return int(a < b)
            if op == "<=":
                return int(a <= b)
    raise TypeError(f"not an expression: {expr!r}")


def _names_in(cmd):
    match cmd:
        case New(name=n) | Dispose(name=n) | Release(name=n) | Acquire(name=n):
            return [n]
        case Input(target=t):
            return [t]
        case Assign(target=t, expr=e):
            return [t] + expr_vars(e)
        case Output(expr=e) | Assert(expr=e):
            return expr_vars(e)
    return []


_THREAD_KIND = {
    New: net.ALLOC, Dispose: net.DISPOSE_K, Assign: net.WRITE,
    Input: net.RECV, Output: net.SEND, Release: net.RELEASE_K,
    Acquire: net.ACQUIRE_K, Assert: net.ASSERT_K, Skip: net.SKIP_MARK,
}

_BIG = 1 << 30


@dataclass
class _Obj:
    value: int
    owner: int  # leaf index
    live: bool
    alloc_span: object


@dataclass
class _SliceSpec:
    id: int
    op: str
    span: object
    parent: int | None
    children: list
    orientation: str
    col_lo: int
    col_hi: int
    first_leaf: int
    n_leaves: int
    row_lo: int = 1
    row_hi: int = 0


class _Run:
    def __init__(self, program, config, source):
        self.program = program
        self.config = config
        self.source = source
        self.leaves = leaves(program.body)
        self.n = len(self.leaves)
        self.thread_names = [lf.thread for lf in self.leaves]
        self.thread_idx = {name: i for i, name in enumerate(self.thread_names)}
        self.global_names = {g.name for g in program.globals_}

        self._classify_channels()
        self._map_tree()
        self._layout()

        self.objects = {}
        for g in program.globals_:
            self.objects[g.name] = _Obj(g.value, self.thread_idx[g.owner], True, g.span)
        self.serials = {}
        self.consumed = {ch: 0 for ch in self.feed}
        self.pcs = [0] * self.n
        self.crashed = [False] * self.n
        self.rows_of_leaf = [[] for _ in range(self.n)]
        self.events = []
        self.transactions = []
        self.arrows = []
        self.violations = []
        self.last_var_event = {}
        self.inconclusive = False

    # -- static analysis ------------------------------------------------

    def _classify_channels(self):
        sends, recvs = set(), set()
        for lf in self.leaves:
            for cmd in lf.commands:
                if isinstance(cmd, Output):
                    sends.add(cmd.channel)
                elif isinstance(cmd, Input):
                    recvs.add(cmd.channel)
        self.chan_kind = {}
        for ch in sends | recvs:
            if ch in sends and ch in recvs:
                self.chan_kind[ch] = "internal"
            elif ch in recvs:
                self.chan_kind[ch] = "in"
            else:
                self.chan_kind[ch] = "out"
        self.feed = {ch: tuple(self.config.channel_inputs.get(ch, ()))
                     for ch, k in self.chan_kind.items() if k == "in"}

    def _map_tree(self):
        self.pair_op = {}
        self.gate = [set() for _ in range(self.n)]
        counter = [0]

        def walk(stmt):
            if isinstance(stmt, Leaf):
                i = counter[0]
                counter[0] += 1
                return [i]
            left = walk(stmt.left)
            right = walk(stmt.right)
            for a in left:
                for b in right:
                    self.pair_op[(a, b)] = stmt.op
            if stmt.op == SEQ:
                for b in right:
                    self.gate[b].update(left)
            return left + right

        walk(self.program.body)

    def _permitted(self, sender, receiver):
        if sender == receiver:
            return False
        a, b = (sender, receiver) if sender < receiver else (receiver, sender)
        op = self.pair_op[(a, b)]
        if op == PAR:
            return True
        if op == CHAIN:
            return sender == a  # data may only flow toward the right operand
        return False

    def _layout(self):
        owner_leaf = {}
        decl_idx = {g.name: gi for gi, g in enumerate(self.program.globals_)}
        mention = {}
        for g in self.program.globals_:
            owner_leaf[g.name] = self.thread_idx[g.owner]
        for i, lf in enumerate(self.leaves):
            for k, cmd in enumerate(lf.commands):
                for nm in _names_in(cmd):
                    mention.setdefault((i, nm), k)
                if isinstance(cmd, New) and cmd.name not in owner_leaf:
                    owner_leaf[cmd.name] = i
        group_vars = [[] for _ in range(self.n)]
        for nm, i in owner_leaf.items():
            group_vars[i].append(nm)
        for i in range(self.n):
            group_vars[i].sort(key=lambda nm: (
                mention.get((i, nm), _BIG), decl_idx.get(nm, _BIG), nm))

        env_in = sorted(ch for ch, k in self.chan_kind.items() if k == "in")
        env_out = sorted(ch for ch, k in self.chan_kind.items() if k == "out")

        plan = [(ch + "?", net.IN_PORT, None) for ch in env_in]
        self.group_interval = {}
        thread_col = {}
        var_col = {}
        for i in range(self.n):
            lo = len(plan)
            thread_col[i] = lo
            plan.append((self.thread_names[i], net.THREAD, None))
            for nm in group_vars[i]:
                var_col[nm] = len(plan)
                plan.append((nm, net.VARIABLE, i))
            self.group_interval[i] = (lo, len(plan) - 1)
        out_col = {}
        for ch in env_out:
            out_col[ch] = len(plan)
            plan.append((ch + "!", net.OUT_PORT, None))

        ncols = len(plan)
        self.slice_specs = []
        self.leaf_slice = {}

        def build(stmt, lo, hi, parent, leaf_at):
            sid = len(self.slice_specs)
            if isinstance(stmt, Leaf):
                spec = _SliceSpec(sid, net.LEAF_OP, stmt.span, parent, [],
                                  "none", lo, hi, leaf_at, 1)
                self.slice_specs.append(spec)
                self.leaf_slice[leaf_at] = sid
                return sid
            count = len(leaves(stmt))
            orientation = net.HORIZONTAL if stmt.op == SEQ else net.VERTICAL
            spec = _SliceSpec(sid, stmt.op, stmt.span, parent, [],
                              orientation, lo, hi, leaf_at, count)
            self.slice_specs.append(spec)
            n_left = len(leaves(stmt.left))
            if stmt.op == SEQ:
                l = build(stmt.left, lo, hi, sid, leaf_at)
                r = build(stmt.right, lo, hi, sid, leaf_at + n_left)
            else:
                boundary = self.group_interval[leaf_at + n_left][0]
                l = build(stmt.left, lo, boundary - 1, sid, leaf_at)
                r = build(stmt.right, boundary, hi, sid, leaf_at + n_left)
            spec.children[:] = [l, r]
            return sid

        build(self.program.body, 0, ncols - 1, None, 0)

        self.lifelines = []
        self.thread_line = {}
        self.var_line = {}
        self.in_port_line = {}
        self.out_port_line = {}
        for col, (name, kind, owner) in enumerate(plan):
            scope = None
            if kind == net.VARIABLE and name not in self.global_names:
                scope = self.leaf_slice[owner]
            line = net.Lifeline(col, name, kind, col, scope=scope)
            self.lifelines.append(line)
            if kind == net.THREAD:
                self.thread_line[self.thread_idx[name]] = col
            elif kind == net.VARIABLE:
                self.var_line[name] = col
            elif kind == net.IN_PORT:
                self.in_port_line[name[:-1]] = col
            else:
                self.out_port_line[name[:-1]] = col

    # -- the loop ---------------------------------------------------------

    def go(self):
        while True:
            cands = self._candidates()
            if not cands:
                break
            if len(self.transactions) >= self.config.max_steps:
                self.violations.append(make_violation(
                    "STEP_LIMIT_EXCEEDED",
                    detail=f"stopped after {self.config.max_steps} steps "
                           f"with work remaining",
                    row=len(self.transactions) + 1))
                self.inconclusive = True
                break
            pick = scheduler_choice(self.config.seed, len(self.transactions),
                                    len(cands))
            cands[pick][-1]()
        if not self.inconclusive:
            unfinished = [i for i in range(self.n)
                          if not self.crashed[i] and not self._finished(i)]
            if unfinished:
                self._classify_stuck(unfinished)
            if all(self._finished(i) for i in range(self.n)):
                self._report_leaks()
        self._margins()
        return self._assemble()

    def _finished(self, i):
        return not self.crashed[i] and self.pcs[i] == len(self.leaves[i].commands)

    def _gate_open(self, i):
        return all(self._finished(j) for j in self.gate[i])

    def _runnable(self, i):
        return (not self.crashed[i] and not self._finished(i)
                and self._gate_open(i))

    def _current(self, i):
        return self.leaves[i].commands[self.pcs[i]]

    def _candidates(self):
        active = [i for i in range(self.n) if self._runnable(i)]
        cands = []
        for i in active:
            cmd = self._current(i)
            entry = None
            match cmd:
                case New(name=nm):
                    entry = ("new", nm)
                case Dispose(name=nm):
                    entry = ("dispose", nm)
                case Assign(target=t):
                    entry = ("assign", t)
                case Assert():
                    entry = ("assert", "")
                case Skip():
                    entry = ("skip", "")
                case Output(channel=ch) if self.chan_kind[ch] == "out":
                    entry = ("env-output", ch)
                case Input(channel=ch) if self.chan_kind[ch] == "in":
                    if self.consumed[ch] < len(self.feed[ch]):
                        entry = ("env-input", ch)
            if entry is not None:
                kind, subject = entry
                cands.append((self.pcs[i], (self.thread_names[i],), kind,
                              subject, (i,),
                              lambda i=i, c=cmd: self._fire_solo(i, c)))
        for i in active:
            rc = self._current(i)
            if isinstance(rc, Input) and self.chan_kind[rc.channel] == "internal":
                for j in active:
                    sc = self._current(j)
                    if (j != i and isinstance(sc, Output)
                            and sc.channel == rc.channel
                            and self._permitted(j, i)):
                        names = tuple(sorted((self.thread_names[i],
                                              self.thread_names[j])))
                        cands.append((
                            self.pcs[i] + self.pcs[j], names, "message",
                            rc.channel, (min(i, j), max(i, j)),
                            lambda j=j, sc=sc, i=i, rc=rc:
                                self._fire_message(j, sc, i, rc)))
            if isinstance(rc, Acquire):
                for j in active:
                    sc = self._current(j)
                    if (j != i and isinstance(sc, Release)
                            and sc.name == rc.name and self._permitted(j, i)):
                        names = tuple(sorted((self.thread_names[i],
                                              self.thread_names[j])))
                        cands.append((
                            self.pcs[i] + self.pcs[j], names, "transfer",
                            rc.name, (min(i, j), max(i, j)),
                            lambda j=j, sc=sc, i=i, rc=rc:
                                self._fire_transfer(j, sc, i, rc)))
        cands.sort(key=lambda c: c[:5])
        return cands

    # -- recording helpers ------------------------------------------------

    def _begin_tx(self, label, issuer_line, span):
        tx = net.Transaction(len(self.transactions), len(self.transactions) + 1,
                             label, issuer_line, (), span)
        self.transactions.append(tx)
        return tx

    def _event(self, tx, line_id, kind):
        ev = net.Event(len(self.events), line_id, tx.id, kind)
        self.events.append(ev)
        tx.participants = tx.participants + (ev.id,)
        return ev

    def _arrow(self, tail, head, orientation, value=None, lifeline=None):
        a = net.Arrow(len(self.arrows), tail, head, orientation, value, lifeline)
        self.arrows.append(a)
        return a

    def _var_event(self, tx, name, kind, value_before):
        line = self.var_line[name]
        prev = self.last_var_event.get(line)
        ev = self._event(tx, line, kind)
        if kind != net.ALLOC:
            if prev is not None:
                self._arrow(prev, ev.id, net.VERTICAL, value_before, line)
            elif name in self.global_names:
                self._arrow(None, ev.id, net.VERTICAL, value_before, line)
        self.last_var_event[line] = ev.id
        return ev

    def _note_rows(self, tx, *leaf_idxs):
        for i in leaf_idxs:
            self.rows_of_leaf[i].append(tx.row)

    def _crash(self, i, cmd, fault):
        tx = self._begin_tx(pretty_command(cmd), self.thread_line[i], cmd.span)
        self._event(tx, self.thread_line[i], _THREAD_KIND[type(cmd)])
        self._note_rows(tx, i)
        self.crashed[i] = True
        self.violations.append(make_violation(
            fault.code,
            loci=[("transaction", tx.id)],
            spans=[fault.span],
            detail=f"{fault.detail} (thread {self.thread_names[i]!r})",
            row=tx.row))

    def _access(self, i, name, span):
        obj = self.objects.get(name)
        if obj is None:
            raise RuntimeFault("UNKNOWN_NAME",
                               f"{name!r} was never allocated", span)
        if not obj.live:
            raise RuntimeFault("USE_AFTER_DISPOSE",
                               f"{name!r} was already disposed", span)
        if obj.owner != i:
            raise RuntimeFault(
                "NOT_OWNER",
                f"{name!r} is held by {self.thread_names[obj.owner]!r}", span)
        return obj

    def _eval(self, i, expr):
        reads = []

        def read(name, span):
            v = self._access(i, name, span).value
            if name not in reads:
                reads.append(name)
            return v

        return evaluate(expr, read), reads

    # -- firing -----------------------------------------------------------

    def _fire_solo(self, i, cmd):
        try:
            self._solo(i, cmd)
        except RuntimeFault as fault:
            self._crash(i, cmd, fault)
        else:
            self.pcs[i] += 1

    def _solo(self, i, cmd):
        t_line = self.thread_line[i]
        label = pretty_command(cmd)
        match cmd:
            case New(name=nm):
                if nm in self.objects:
                    why = ("is still allocated" if self.objects[nm].live
                           else "was already used up; names are not reused")
                    raise RuntimeFault("DOUBLE_ALLOCATE", f"{nm!r} {why}",
                                       cmd.span)
                tx = self._begin_tx(label, t_line, cmd.span)
                te = self._event(tx, t_line, net.ALLOC)
                ve = self._var_event(tx, nm, net.ALLOC, 0)
                self._arrow(te.id, ve.id, net.HORIZONTAL)
                self.objects[nm] = _Obj(0, i, True, cmd.span)
                self.lifelines[self.var_line[nm]].alloc_row = tx.row
            case Dispose(name=nm):
                obj = self._access(i, nm, cmd.span)
                tx = self._begin_tx(label, t_line, cmd.span)
                te = self._event(tx, t_line, net.DISPOSE_K)
                ve = self._var_event(tx, nm, net.DISPOSE_K, obj.value)
                self._arrow(te.id, ve.id, net.HORIZONTAL)
                obj.live = False
                self.lifelines[self.var_line[nm]].dispose_row = tx.row
            case Assign(target=tgt, expr=e):
                value, reads = self._eval(i, e)
                obj = self._access(i, tgt, cmd.span)
                tx = self._begin_tx(label, t_line, cmd.span)
                te = self._event(tx, t_line, net.WRITE)
                for r in reads:
                    if r == tgt:
                        continue  # self-update folds into the write
                    re_ = self._var_event(tx, r, net.READ, self.objects[r].value)
                    self._arrow(re_.id, te.id, net.HORIZONTAL,
                                self.objects[r].value)
                we = self._var_event(tx, tgt, net.WRITE, obj.value)
                self._arrow(te.id, we.id, net.HORIZONTAL, value)
                obj.value = value
            case Assert(expr=e):
                value, reads = self._eval(i, e)
                if value == 0:
                    raise RuntimeFault("ASSERT_FALSE",
                                       f"{label!r} does not hold", cmd.span)
                tx = self._begin_tx(label, t_line, cmd.span)
                te = self._event(tx, t_line, net.ASSERT_K)
                for r in reads:
                    re_ = self._var_event(tx, r, net.READ, self.objects[r].value)
                    self._arrow(re_.id, te.id, net.HORIZONTAL,
                                self.objects[r].value)
            case Skip():
                tx = self._begin_tx(label, t_line, cmd.span)
                self._event(tx, t_line, net.SKIP_MARK)
            case Output(channel=ch, expr=e):
                value, reads = self._eval(i, e)
                tx = self._begin_tx(label, t_line, cmd.span)
                te = self._event(tx, t_line, net.SEND)
                for r in reads:
                    re_ = self._var_event(tx, r, net.READ, self.objects[r].value)
                    self._arrow(re_.id, te.id, net.HORIZONTAL,
                                self.objects[r].value)
                pe = self._event(tx, self.out_port_line[ch], net.SEND)
                self._arrow(te.id, pe.id, net.HORIZONTAL, value)
                self._arrow(pe.id, None, net.HORIZONTAL, value)
            case Input(target=tgt, channel=ch):
                obj = self._access(i, tgt, cmd.span)
                value = self.feed[ch][self.consumed[ch]]
                tx = self._begin_tx(label, t_line, cmd.span)
                pe = self._event(tx, self.in_port_line[ch], net.RECV)
                te = self._event(tx, t_line, net.RECV)
                we = self._var_event(tx, tgt, net.WRITE, obj.value)
                self._arrow(None, pe.id, net.HORIZONTAL, value)
                self._arrow(pe.id, te.id, net.HORIZONTAL, value)
                self._arrow(te.id, we.id, net.HORIZONTAL, value)
                self.consumed[ch] += 1
                obj.value = value
            case _:
                raise AssertionError(f"not a solo command: {cmd!r}")
        self._note_rows(tx, i)

    def _fire_message(self, j, send_cmd, i, recv_cmd):
        try:
            value, reads = self._eval(j, send_cmd.expr)
        except RuntimeFault as fault:
            self._crash(j, send_cmd, fault)
            return
        try:
            obj = self._access(i, recv_cmd.target, recv_cmd.span)
        except RuntimeFault as fault:
            self._crash(i, recv_cmd, fault)
            return
        label = f"{pretty_command(send_cmd)} / {pretty_command(recv_cmd)}"
        tx = self._begin_tx(label, self.thread_line[j],
                            send_cmd.span.join(recv_cmd.span))
        se = self._event(tx, self.thread_line[j], net.SEND)
        for r in reads:
            re_ = self._var_event(tx, r, net.READ, self.objects[r].value)
            self._arrow(re_.id, se.id, net.HORIZONTAL, self.objects[r].value)
        te = self._event(tx, self.thread_line[i], net.RECV)
        self._arrow(se.id, te.id, net.HORIZONTAL, value)
        we = self._var_event(tx, recv_cmd.target, net.WRITE, obj.value)
        self._arrow(te.id, we.id, net.HORIZONTAL, value)
        obj.value = value
        self._note_rows(tx, i, j)
        self.pcs[j] += 1
        self.pcs[i] += 1

    def _fire_transfer(self, j, rel_cmd, i, acq_cmd):
        try:
            obj = self._access(j, rel_cmd.name, rel_cmd.span)
        except RuntimeFault as fault:
            self._crash(j, rel_cmd, fault)
            return
        nm = rel_cmd.name
        n = self.serials.get(nm, 0)
        self.serials[nm] = n + 2
        label = f"rel.{n + 1}({nm}) / acq.{n + 2}({nm})"
        tx = self._begin_tx(label, self.thread_line[j],
                            rel_cmd.span.join(acq_cmd.span))
        je = self._event(tx, self.thread_line[j], net.RELEASE_K)
        oe = self._var_event(tx, nm, net.RELEASE_K, obj.value)
        ie = self._event(tx, self.thread_line[i], net.ACQUIRE_K)
        self._arrow(je.id, oe.id, net.HORIZONTAL, obj.value)
        self._arrow(oe.id, ie.id, net.HORIZONTAL, obj.value)
        obj.owner = i
        self._note_rows(tx, i, j)
        self.pcs[j] += 1
        self.pcs[i] += 1

    # -- endings ----------------------------------------------------------

    def _remaining_match(self, j, pred):
        for cmd in self.leaves[j].commands[self.pcs[j]:]:
            if pred(cmd):
                return cmd
        return None

    def _classify_stuck(self, unfinished):
        starving = {}
        edges = {}
        for i in sorted(unfinished):
            if not self._gate_open(i):
                starving[i] = ("a sequential predecessor never finishes",
                               self.leaves[i].span)
                continue
            cmd = self._current(i)
            match cmd:
                case Input(channel=ch) if self.chan_kind[ch] == "in":
                    starving[i] = (f"the input feed for {ch!r} is exhausted",
                                   cmd.span)
                    continue
                case Input(channel=ch):
                    pred = lambda c, ch=ch: (isinstance(c, Output)
                                             and c.channel == ch)
                    ok = lambda j, i=i: self._permitted(j, i)
                    miss = f"no reachable thread may still send on {ch!r}"
                    resource = ch
                case Output(channel=ch):
                    pred = lambda c, ch=ch: (isinstance(c, Input)
                                             and c.channel == ch)
                    ok = lambda j, i=i: self._permitted(i, j)
                    miss = f"no reachable thread may still receive on {ch!r}"
                    resource = ch
                case Acquire(name=nm):
                    pred = lambda c, nm=nm: (isinstance(c, Release)
                                             and c.name == nm)
                    ok = lambda j, i=i: self._permitted(j, i)
                    miss = f"no reachable thread may still release {nm!r}"
                    resource = nm
                case Release(name=nm):
                    pred = lambda c, nm=nm: (isinstance(c, Acquire)
                                             and c.name == nm)
                    ok = lambda j, i=i: self._permitted(i, j)
                    miss = f"no reachable thread may still acquire {nm!r}"
                    resource = nm
                case _:
                    starving[i] = ("the step budget ran dry", cmd.span)
                    continue
            partners = []
            for j in sorted(unfinished):
                if j == i or not ok(j):
                    continue
                m = self._remaining_match(j, pred)
                if m is not None:
                    partners.append((j, resource, cmd.span, m.span))
            if partners:
                edges[i] = partners
            else:
                starving[i] = (miss, cmd.span)

        succ = {i: [p[0] for p in ps] for i, ps in edges.items()}
        _, comps = _tarjan(succ)
        cycles = [set(s) for s in comps if len(s) >= 2]
        in_cycle = set().union(*cycles) if cycles else set()
        last_row = len(self.transactions) + 1

        for scc in sorted(cycles,
                          key=lambda s: min(self.thread_names[i] for i in s)):
            cycle, epath = self._extract_cycle(scc, edges)
            witness = []
            spans = []
            for k, t in enumerate(cycle):
                witness.append(self.thread_names[t])
                witness.append(epath[k][1])
                spans.extend((epath[k][2], epath[k][3]))
            witness.append(self.thread_names[cycle[0]])
            names = ", ".join(self.thread_names[t] for t in cycle)
            self.violations.append(make_violation(
                "DEADLOCK_CYCLE",
                loci=self._last_event_loci(cycle),
                spans=spans,
                detail=f"threads {names} wait on each other in a cycle",
                witness=tuple(witness),
                row=last_row))

        lonely = sorted(set(edges) - in_cycle | set(starving),
                        key=lambda i: self.thread_names[i])
        for i in lonely:
            if i in starving:
                reason, span = starving[i]
            else:
                reason, span = ("every rendezvous partner is itself stuck",
                                self._current(i).span)
            self.violations.append(make_violation(
                "STARVATION",
                loci=self._last_event_loci([i]),
                spans=[span],
                detail=f"thread {self.thread_names[i]!r} can never proceed: "
                       f"{reason}",
                row=last_row))

    def _extract_cycle(self, scc, edges):
        """A simple cycle inside one strongly connected wait knot, as
        (thread list, matching edge list), rotated to the least thread name."""
        name = lambda i: self.thread_names[i]
        start = min(scc, key=name)
        path, epath = [start], []
        cur = start
        while True:
            options = sorted((e for e in edges[cur] if e[0] in scc),
                             key=lambda e: name(e[0]))
            closing = [e for e in options if e[0] == start]
            if closing and len(path) >= 2:
                epath.append(closing[0])
                break
            nxt = next((e for e in options if e[0] not in path), None)
            if nxt is None:
                nxt = options[0]  # revisits an inner node: trim to the loop
                k = path.index(nxt[0])
                path, epath = path[k:], epath[k:]
                epath.append(nxt)
                break
            epath.append(nxt)
            path.append(nxt[0])
            cur = nxt[0]
        k = path.index(min(path, key=name))
        return path[k:] + path[:k], epath[k:] + epath[:k]

    def _last_event_loci(self, leaf_idxs):
        idx_events = {}
        for ev in self.events:
            idx_events[ev.lifeline] = ev.id
        loci = []
        for i in leaf_idxs:
            eid = idx_events.get(self.thread_line[i])
            if eid is not None:
                loci.append(("event", eid))
        return loci

    def _report_leaks(self):
        last_row = len(self.transactions) + 1
        for line in self.lifelines:
            if line.kind != net.VARIABLE or line.name in self.global_names:
                continue
            obj = self.objects.get(line.name)
            if obj is None or not obj.live:
                continue
            self.violations.append(make_violation(
                "LEAKED_OBJECT",
                loci=[("event", self.last_var_event[line.id])],
                spans=[obj.alloc_span],
                detail=f"{line.name!r} was allocated but never disposed",
                row=last_row))

    def _margins(self):
        for line in self.lifelines:
            if line.kind != net.VARIABLE:
                continue
            obj = self.objects.get(line.name)
            if obj is None:
                continue  # its new never fired
            last = self.last_var_event.get(line.id)
            if last is None:
                if obj.live:
                    self._arrow(None, None, net.VERTICAL, obj.value, line.id)
            elif obj.live:
                self._arrow(last, None, net.VERTICAL, obj.value, line.id)

    def _assemble(self):
        def assign_rows(sid, lo, hi):
            spec = self.slice_specs[sid]
            spec.row_lo, spec.row_hi = lo, hi
            if not spec.children:
                return
            if spec.op == SEQ:
                right = self.slice_specs[spec.children[1]]
                rows = [r for i in range(right.first_leaf,
                                         right.first_leaf + right.n_leaves)
                        for r in self.rows_of_leaf[i]]
                m = min(rows, default=hi + 1)
                assign_rows(spec.children[0], lo, m - 1)
                assign_rows(spec.children[1], m, hi)
            else:
                for c in spec.children:
                    assign_rows(c, lo, hi)

        assign_rows(0, 1, len(self.transactions))
        slices = [net.Slice(s.id, s.op, s.span, s.parent, tuple(s.children),
                            s.orientation, s.row_lo, s.row_hi, s.col_lo, s.col_hi)
                  for s in self.slice_specs]
        return net.Diagram(
            source=self.source,
            config=self.config,
            globals_=tuple((g.name, g.value, g.owner)
                           for g in self.program.globals_),
            lifelines=self.lifelines,
            events=self.events,
            transactions=self.transactions,
            arrows=self.arrows,
            slices=slices,
            violations=self.violations,
        )


def run(program, config=None, source=""):
    """Execute a parsed program under a seeded scheduler; returns the Diagram."""
    return _Run(program, config or RunConfig(), source).go()


def run_text(text, config=None):
    """parse + run; returns the Diagram or the list of ParseFailure."""
    parsed = parse(text)
    if isinstance(parsed, list):
        return parsed
    return run(parsed, config, source=text)
