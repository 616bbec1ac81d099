"""Command line and HTTP surface."""

import json
import pathlib
import subprocess
import sys
import threading
import urllib.error
import urllib.request

import pytest

from geotrace import query
from geotrace.cli import main
from geotrace.docio import deserialize, load, serialize
from geotrace.execute import RunConfig, run_text
from geotrace.server import make_server

GOLDENS = pathlib.Path(__file__).parent / "goldens"

CLEAN = "t:(new x; x := 2; dispose x)\n"
FAULTY = "t:(new x; x := 1 / 0; dispose x)\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ---- run --------------------------------------------------------------------

def test_run_clean_prints_document(tmp_path, capsysbinary):
    rc = main(["run", write(tmp_path, "p.gt", CLEAN)])
    out, err = capsysbinary.readouterr()
    assert rc == 0
    assert err == b""
    assert deserialize(out).source == CLEAN


def test_run_writes_output_file(tmp_path, capsysbinary):
    target = tmp_path / "out.diagram.json"
    rc = main(["run", write(tmp_path, "p.gt", CLEAN), "-o", str(target)])
    out, _ = capsysbinary.readouterr()
    assert rc == 0
    assert out == b""
    assert load(target).source == CLEAN


def test_run_reports_developer_fault(tmp_path, capsysbinary):
    rc = main(["run", write(tmp_path, "p.gt", FAULTY)])
    out, err = capsysbinary.readouterr()
    assert rc == 10
    # the document still comes out; the verdict goes to stderr
    assert deserialize(out).violations
    assert err.decode().startswith("ZERO_DIVIDE [developer] row 2: ")


def test_run_parse_failure(tmp_path, capsysbinary):
    rc = main(["run", write(tmp_path, "p.gt", "t:(")])
    out, err = capsysbinary.readouterr()
    assert rc == 30
    assert out == b""
    line = err.decode().splitlines()[0]
    assert line.startswith("PARSE_ERROR [prevention] at ")


def test_run_deadlock_grades_developer(tmp_path, capsysbinary):
    src = ("globals { a = 0 @ t  b = 0 @ u }\n"
           "t:(acquire b; release a) | u:(acquire a; release b)\n")
    rc = main(["run", write(tmp_path, "p.gt", src)])
    _, err = capsysbinary.readouterr()
    assert rc == 10
    assert "DEADLOCK_CYCLE [developer]" in err.decode()


def test_run_step_limit_grades_inconclusive(tmp_path, capsysbinary):
    rc = main(["run", write(tmp_path, "p.gt", "t:(skip; skip; skip)"),
               "--max-steps", "2"])
    _, err = capsysbinary.readouterr()
    assert rc == 40
    assert "STEP_LIMIT_EXCEEDED [inconclusive]" in err.decode()


def test_run_matches_worked_example_golden(tmp_path, capsysbinary):
    rc = main(["run", str(GOLDENS / "worked_example.gt"),
               "--seed", "0", "--in", "c=8",
               "--msg-offset", "c=83", "--msg-offset", "d=36"])
    out, err = capsysbinary.readouterr()
    assert (rc, err) == (0, b"")
    assert out == (GOLDENS / "worked_example.diagram.json").read_bytes()


def test_run_feed_flag_validation(tmp_path, capsysbinary):
    with pytest.raises(SystemExit) as exit_info:
        main(["run", write(tmp_path, "p.gt", CLEAN), "--in", "c=1,oops"])
    assert exit_info.value.code == 2


def test_run_missing_file(capsysbinary):
    rc = main(["run", "/no/such/file.gt"])
    _, err = capsysbinary.readouterr()
    assert rc == 2
    assert err.decode().startswith("geotrace: ")


# ---- check ------------------------------------------------------------------

def test_check_clean(tmp_path, capsysbinary):
    main(["run", write(tmp_path, "p.gt", CLEAN), "-o",
          str(tmp_path / "d.json")])
    capsysbinary.readouterr()
    rc = main(["check", str(tmp_path / "d.json")])
    out, _ = capsysbinary.readouterr()
    assert rc == 0
    assert out == b"clean\n"


def test_check_planted_fixture_grades_implementer(capsysbinary):
    rc = main(["check", str(GOLDENS / "planted_seq_back.diagram.json")])
    out, _ = capsysbinary.readouterr()
    assert rc == 20
    assert out.decode().startswith("SEQ_BACK_ARROW [implementer] row ")


def test_check_recorded_fault_grades_developer(tmp_path, capsysbinary):
    main(["run", write(tmp_path, "p.gt", FAULTY), "-o",
          str(tmp_path / "d.json")])
    capsysbinary.readouterr()
    rc = main(["check", str(tmp_path / "d.json")])
    out, _ = capsysbinary.readouterr()
    assert rc == 10
    assert "ZERO_DIVIDE [developer]" in out.decode()


def test_check_rejects_garbage(tmp_path, capsysbinary):
    bad = tmp_path / "bad.json"
    bad.write_text("{]")
    rc = main(["check", str(bad)])
    _, err = capsysbinary.readouterr()
    assert rc == 20
    assert err.decode().startswith("geotrace: not a diagram document")


# ---- query and locate -------------------------------------------------------

@pytest.fixture()
def worked(tmp_path):
    return str(GOLDENS / "worked_example.diagram.json")


def test_query_back_json(worked, capsysbinary):
    rc = main(["query", worked, "--event", "0", "--back"])
    out, _ = capsysbinary.readouterr()
    assert rc == 0
    d = load(GOLDENS / "worked_example.diagram.json")
    expect = [{"from": s.from_event, "via": s.via, "to": s.to_event,
               "direction": s.direction, "label": s.label}
              for s in query.immediate_causes(d, 0)]
    assert json.loads(out) == expect


def test_query_past_is_sorted_ids(worked, capsysbinary):
    rc = main(["query", worked, "--event", "13", "--past"])
    out, _ = capsysbinary.readouterr()
    assert rc == 0
    d = load(GOLDENS / "worked_example.diagram.json")
    assert json.loads(out) == sorted(query.causal_past(d, 13))


def test_query_forward_json(worked, capsysbinary):
    rc = main(["query", worked, "--event", "0", "--forward"])
    out, _ = capsysbinary.readouterr()
    assert rc == 0
    assert all(step["direction"] == "forward" for step in json.loads(out))


def test_query_unknown_event(worked, capsysbinary):
    rc = main(["query", worked, "--event", "999", "--back"])
    _, err = capsysbinary.readouterr()
    assert rc == 2
    assert "no event 999" in err.decode()


def test_query_needs_exactly_one_direction(worked):
    with pytest.raises(SystemExit) as exit_info:
        main(["query", worked, "--event", "0", "--back", "--past"])
    assert exit_info.value.code == 2
    with pytest.raises(SystemExit) as exit_info:
        main(["query", worked, "--event", "0"])
    assert exit_info.value.code == 2


def test_locate_zero_divide(tmp_path, capsysbinary):
    main(["run", write(tmp_path, "p.gt", FAULTY), "-o",
          str(tmp_path / "d.json")])
    capsysbinary.readouterr()
    rc = main(["locate", str(tmp_path / "d.json"), "--violation", "0"])
    out, _ = capsysbinary.readouterr()
    assert rc == 0
    spots = json.loads(out)
    assert [s["label"] for s in spots] == ["x := 1 / 0", "1 / 0"]
    start, end = spots[1]["span"]
    assert FAULTY[start:end] == "1 / 0"


def test_locate_out_of_range(worked, capsysbinary):
    rc = main(["locate", worked, "--violation", "0"])
    _, err = capsysbinary.readouterr()
    assert rc == 2
    assert "this diagram has 0" in err.decode()


def test_usage_error_without_subcommand():
    with pytest.raises(SystemExit) as exit_info:
        main([])
    assert exit_info.value.code == 2


def test_module_entry_point(tmp_path):
    src = tmp_path / "p.gt"
    src.write_text(CLEAN)
    proc = subprocess.run([sys.executable, "-m", "geotrace.cli", "run",
                           str(src)], capture_output=True)
    assert proc.returncode == 0
    assert deserialize(proc.stdout).source == CLEAN


# ---- serve ------------------------------------------------------------------

@pytest.fixture()
def http_root():
    d = run_text("t:(new x; x := 2; dispose x)", RunConfig(seed=0))
    srv = make_server(d, port=0, quiet=True)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield d, f"http://127.0.0.1:{srv.server_address[1]}"
    srv.shutdown()
    thread.join(timeout=5)


def fetch(url):
    try:
        with urllib.request.urlopen(url) as resp:
            return resp.status, resp.read(), resp.headers.get("Content-Type")
    except urllib.error.HTTPError as err:
        return err.code, err.read(), err.headers.get("Content-Type")


def test_http_diagram_endpoint(http_root):
    d, root = http_root
    status, body, ctype = fetch(root + "/api/diagram")
    assert status == 200
    assert ctype == "application/json"
    assert body == serialize(d)


def test_http_causal_past(http_root):
    d, root = http_root
    status, body, _ = fetch(root + "/api/causal-past?event=3")
    assert status == 200
    assert json.loads(body) == sorted(query.causal_past(d, 3))


def test_http_bad_query(http_root):
    _, root = http_root
    status, body, _ = fetch(root + "/api/causal-past?event=banana")
    assert status == 400
    assert json.loads(body)["error"] == "expected a single integer ?event=ID"
    status, _, _ = fetch(root + "/api/causal-past")
    assert status == 400


def test_http_unknown_event(http_root):
    _, root = http_root
    status, body, _ = fetch(root + "/api/causal-past?event=999")
    assert status == 404
    assert "no event 999" in json.loads(body)["error"]


def test_http_fallback_page(http_root):
    _, root = http_root
    status, body, ctype = fetch(root + "/")
    assert status == 200
    assert ctype.startswith("text/html")
    assert b"/api/diagram" in body


def test_http_refuses_writes(http_root):
    _, root = http_root
    req = urllib.request.Request(root + "/api/diagram", data=b"{}",
                                 method="POST")
    with pytest.raises(urllib.error.HTTPError) as err:
        urllib.request.urlopen(req)
    assert err.value.code == 405


def test_http_serves_ui_dir_but_not_parents(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<h1>net viewer</h1>")
    (ui / "app.js").write_text("console.log('hi')")
    (tmp_path / "secret.txt").write_text("keep out")
    d = run_text("t:(skip)", RunConfig(seed=0))
    srv = make_server(d, port=0, ui_dir=ui, quiet=True)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    root = f"http://127.0.0.1:{srv.server_address[1]}"
    try:
        status, body, ctype = fetch(root + "/")
        assert (status, body) == (200, b"<h1>net viewer</h1>")
        status, _, ctype = fetch(root + "/app.js")
        assert status == 200
        assert "javascript" in ctype
        status, _, _ = fetch(root + "/../secret.txt")
        assert status == 404
        status, _, _ = fetch(root + "/%2e%2e/secret.txt")
        assert status == 404
        status, _, _ = fetch(root + "/missing.css")
        assert status == 404
    finally:
        srv.shutdown()
        thread.join(timeout=5)
