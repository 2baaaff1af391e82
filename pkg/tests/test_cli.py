import json

import numpy as np
import pytest

from hopx import checks, cli
from hopx.checks import Outcome
from hopx.core import SolveReport, TraceRecord
from hopx.instance import InstanceParseError, generate, parse_instance, serialize_instance


@pytest.mark.parametrize("kind", ["quadratic", "l1", "linear", "point"])
def test_round_trip_bit_exact(kind):
    inst = generate(kind, 7, seed=11, p=3.0, sigma=0.37)
    back = parse_instance(serialize_instance(inst))
    assert (back.kind, back.p, back.sigma) == (kind, 3.0, 0.37)
    for name in ("c", "A", "b", "a"):
        v = getattr(inst, name)
        if v is not None:
            assert np.array_equal(getattr(back, name), v)
    assert serialize_instance(back) == serialize_instance(inst)


def test_generate_is_seeded():
    assert serialize_instance(generate("quadratic", 5, 3)) == serialize_instance(generate("quadratic", 5, 3))
    assert serialize_instance(generate("quadratic", 5, 3)) != serialize_instance(generate("quadratic", 5, 4))


def test_draw_order():
    rng = np.random.Generator(np.random.PCG64(9))
    a = rng.standard_normal(4)
    c = rng.standard_normal(4)
    inst = generate("linear", 4, 9)
    assert np.array_equal(inst.a, a) and np.array_equal(inst.c, c)


@pytest.mark.parametrize("text, lineno", [
    ("nope\n", 1),
    ("hopx-instance v1\nkind: cubic\np: 2\nsigma: 1\nn: 1\nc:\n0\n", 2),
    ("hopx-instance v1\nkind: l1\np: 0.5\nsigma: 1\nn: 1\nc:\n0\n", 3),
    ("hopx-instance v1\nkind: l1\np: 2\nsigma: 1\nn: 2\nc:\n0 x\n", 7),
    ("hopx-instance v1\nkind: l1\np: 2\nsigma: 1\nn: 2\nc:\n0 1 2\n", 7),
    ("hopx-instance v1\nkind: linear\np: 2\nsigma: 1\nn: 1\nc:\n0\n", 7),
])
def test_parse_errors_carry_line(text, lineno):
    with pytest.raises(InstanceParseError) as err:
        parse_instance(text)
    assert err.value.lineno == lineno


def test_comments_are_skipped():
    inst = parse_instance("# hi\nhopx-instance v1\nkind: l1\np: 2\nsigma: 1\nn: 1\n# c next\nc:\n4\n")
    assert inst.c.tolist() == [4.0]


def _gen(tmp_path, kind, n=6, seed=1, *extra):
    path = tmp_path / f"{kind}.txt"
    assert cli.main(["gen", kind, "--n", str(n), "--seed", str(seed), "--out", str(path), *extra]) == 0
    return path


def test_gen_to_stdout(capsys):
    assert cli.main(["gen", "l1", "--n", "2", "--seed", "5"]) == 0
    assert capsys.readouterr().out == serialize_instance(generate("l1", 2, 5))


def test_gen_needs_n():
    assert cli.main(["gen", "l1"]) == 1


def test_linear_trace(tmp_path, capsys):
    inst = _gen(tmp_path, "linear")
    trace = tmp_path / "t.csv"
    assert cli.main(["solve", "--instance", str(inst), "--trace", str(trace)]) == 0
    rows = trace.read_text().splitlines()
    assert rows[0] == cli.TRACE_HEADER
    assert len(rows) >= 2
    out = capsys.readouterr().out
    assert "converged=true" in out and "method=fixedpoint" in out


def test_bisect_requires_p2(tmp_path):
    inst = _gen(tmp_path, "quadratic", 4, 1, "--p", "3")
    assert cli.main(["solve", "--instance", str(inst), "--method", "bisect"]) == 1


def test_bisect_p2(tmp_path, capsys):
    inst = _gen(tmp_path, "l1")
    assert cli.main(["solve", "--instance", str(inst), "--method", "bisect"]) == 0
    assert "method=bisect" in capsys.readouterr().out


def test_sweep_writes_one_trace_per_p(tmp_path, monkeypatch):
    monkeypatch.setenv("HOPX_THREADS", "3")
    inst = _gen(tmp_path, "quadratic")
    trace = tmp_path / "sweep.csv"
    assert cli.main(["solve", "--instance", str(inst), "--p", "2,3,4", "--trace", str(trace)]) == 0
    for p in (2, 3, 4):
        assert (tmp_path / f"sweep_p{p}.csv").read_text().startswith(cli.TRACE_HEADER)


def test_identical_runs_identical_bytes(tmp_path):
    blobs = []
    for run in range(2):
        d = tmp_path / str(run)
        d.mkdir()
        inst = _gen(d, "quadratic", 8, 42)
        assert cli.main(["solve", "--instance", str(inst), "--p", "3", "--trace", str(d / "t.csv")]) == 0
        blobs.append((inst.read_bytes(), (d / "t.csv").read_bytes()))
    assert blobs[0] == blobs[1]


def test_timing_flag_fills_elapsed():
    rec = TraceRecord(0, 1.0, 1.0, 1.0, 0.0, 0.0, 3.5, np.zeros(1), np.zeros(1))
    rep = SolveReport(np.zeros(1), np.zeros(1), 0, True, [rec])
    assert cli.trace_csv(rep).splitlines()[1].endswith(",0")
    assert cli.trace_csv(rep, timing=True).splitlines()[1].endswith(",3.5")


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("hopx-instance v1\nkind: l1\np: 2\nsigma: 1\nn: 2\nc:\n1\n")
    assert cli.main(["solve", "--instance", str(bad)]) == 1
    assert "line 7" in capsys.readouterr().err


def test_missing_file_exit(tmp_path):
    assert cli.main(["solve", "--instance", str(tmp_path / "none.txt")]) == 1


def test_unknown_flag_exit():
    with pytest.raises(SystemExit) as err:
        cli.main(["solve", "--bogus"])
    assert err.value.code == 1


def test_iteration_cap_exit(tmp_path):
    inst = _gen(tmp_path, "quadratic", 10, 2)
    assert cli.main(["solve", "--instance", str(inst), "--max-iters", "1", "--tol", "1e-14"]) == 2


def test_dump_lambda_and_file_start(tmp_path, capsys):
    inst = _gen(tmp_path, "l1")
    dump = tmp_path / "lam.txt"
    assert cli.main(["solve", "--instance", str(inst), "--dump-lambda", str(dump)]) == 0
    lams = np.loadtxt(dump, ndmin=2)
    first = tmp_path / "lam0.txt"
    first.write_text(" ".join(repr(float(v)) for v in lams[-1]))
    capsys.readouterr()
    assert cli.main(["solve", "--instance", str(inst), "--lambda0", f"file:{first}",
                     "--dump-lambda", str(tmp_path / "again.txt")]) == 0
    again = np.loadtxt(tmp_path / "again.txt", ndmin=2)
    assert np.max(np.abs(again[0] - lams[-1])) <= 1e-15


def test_bad_lambda0(tmp_path):
    inst = _gen(tmp_path, "l1")
    assert cli.main(["solve", "--instance", str(inst), "--lambda0", "guess"]) == 1
    short = tmp_path / "short.txt"
    short.write_text("1 2")
    assert cli.main(["solve", "--instance", str(inst), "--lambda0", f"file:{short}"]) == 1


@pytest.mark.parametrize("prop, extra", [
    ("contraction", ["--seed", "7", "--n", "20"]),
    ("lemma51", ["--seed", "7"]),
    ("duality", ["--seed", "7", "--n", "5"]),
    ("oracle-agreement", ["--seed", "1", "--n", "6"]),
])
def test_check_passes(prop, extra, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(["check", prop, *extra]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-1].startswith(f"check={prop} summary") and out[-1].endswith("failed=0")


def test_check_violation_writes_counterexample(tmp_path, monkeypatch):
    def broken(seed, n):
        yield Outcome("contraction", "rigged", False, "ratio=2", {"c": [1.0]})
    monkeypatch.setitem(checks.PROPERTIES, "contraction", broken)
    out = tmp_path / "cx.json"
    assert cli.main(["check", "contraction", "--counterexample", str(out)]) == 3
    assert json.loads(out.read_text()) == [{"case": "rigged", "detail": "ratio=2", "c": [1.0]}]
