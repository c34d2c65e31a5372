import csv
import io
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from symcop import cli
from symcop.cli import Cell, main, render_tables
from symcop.jordan import ConeShape
from symcop.model import ConicProblem
from symcop.solver import SolverConfig


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_dp_concise(tmp_path, capsys):
    code, out, _ = run(capsys, "build", "dp", 0, 1, 3, "--concise", "--out", tmp_path)
    assert code == 0
    stem = tmp_path / "dp_r0_n1-3_s0_concise"
    p = ConicProblem.load_json(str(stem) + ".json")
    assert (tmp_path / "dp_r0_n1-3_s0_concise.dat-s").exists()
    assert len(p.cones) == 4
    assert sorted(c.kind for c in p.cones) == ["nonneg", "psd", "psd", "soc"]
    assert p.metadata["seed"] == 0 and np.array(p.metadata["C"]).shape == (4, 4)


def test_build_lasserre_single_block(tmp_path, capsys):
    assert run(capsys, "build", "lasserre", 0, 0, 2, "--out", tmp_path)[0] == 0
    p = ConicProblem.load_json(str(tmp_path / "lasserre_r0_n0-2_s0.json"))
    assert [(c.kind, c.dim) for c in p.cones] == [("psd", 1)]


def test_build_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(capsys, "build", "yildirim", 1, 1, 2, "--seed", 5, "--out", tmp_path / d)[0] == 0
    for ext in (".json", ".dat-s"):
        name = "yildirim_r1_n1-2_s5" + ext
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_build_invalid(tmp_path, capsys):
    assert run(capsys, "build", "bogus", 0, 1, 3, "--out", tmp_path)[0] == 2
    assert run(capsys, "build", "dp", 0, 1, 1, "--out", tmp_path)[0] == 2
    assert run(capsys, "build", "dp", -1, 1, 3, "--out", tmp_path)[0] == 2
    assert run(capsys, "build")[0] == 2


def lp_file(tmp_path):
    p = ConicProblem(name="lp")
    p.add_scalar("y")
    p.set_objective({"y": 1.0})
    p.add_cone("nonneg", [1.0], {"y": [-1.0]})
    path = tmp_path / "lp.json"
    p.save_json(path)
    return path


def test_solve_lp(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", lp_file(tmp_path))
    assert code == 0
    assert "status      Optimal" in out
    y = float(next(ln for ln in out.splitlines() if ln.startswith("y ")).split()[1])
    assert y == pytest.approx(1.0, abs=1e-7)
    for key in ("preparetime", "solvertime", "totaltime", "residuals"):
        assert key in out


def objective(out):
    return float(next(ln for ln in out.splitlines() if ln.startswith("objective")).split()[1])


def test_solve_sandwich(tmp_path, capsys):
    for h in ("dp", "yildirim"):
        assert run(capsys, "build", h, 2, 1, 2, "--seed", 3, "--out", tmp_path)[0] == 0
    _, out_dp, _ = run(capsys, "solve", tmp_path / "dp_r2_n1-2_s3.json")
    _, out_y, _ = run(capsys, "solve", tmp_path / "yildirim_r2_n1-2_s3.json")
    assert objective(out_dp) <= objective(out_y) + 1e-6
    # the SDPA file of the same instance gives the same optimum
    _, out_s, _ = run(capsys, "solve", tmp_path / "dp_r2_n1-2_s3.dat-s")
    assert objective(out_s) == pytest.approx(objective(out_dp), abs=1e-6)


def test_solve_external(tmp_path, capsys):
    pytest.importorskip("sdpap")
    code, out, _ = run(capsys, "solve", lp_file(tmp_path), "--solver", "external")
    assert code in (0, 3)
    assert objective(out) == pytest.approx(1.0, abs=1e-6)


def test_tol_forwarded(tmp_path, capsys, monkeypatch):
    seen = []
    real = cli.solve

    def spy(p, cfg=None):
        seen.append(cfg)
        return real(p, cfg)

    monkeypatch.setattr(cli, "solve", spy)
    run(capsys, "solve", lp_file(tmp_path), "--tol", "1e-5", "--max-iterations", 50)
    assert isinstance(seen[0], SolverConfig)
    assert seen[0].eps_feas == 1e-5 and seen[0].eps_gap == 1e-5 and seen[0].max_iterations == 50


def test_solve_stall_and_missing(tmp_path, capsys):
    assert run(capsys, "solve", lp_file(tmp_path), "--max-iterations", 1)[0] == 3
    assert run(capsys, "solve", tmp_path / "nope.json")[0] == 2
    bad = tmp_path / "bad.dat-s"
    bad.write_text("1\n1\n2\n1.0\n0 1 1 x 1.0\n")
    code, _, err = run(capsys, "solve", bad)
    assert code == 2 and "line 5, column 7" in err


def test_config_file(tmp_path, capsys):
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps({"seed": 9, "out": str(tmp_path / "o")}))
    assert run(capsys, "--config", cfgp, "build", "dp", 0, 0, 2)[0] == 0
    assert (tmp_path / "o" / "dp_r0_n0-2_s9.json").exists()
    # command-line flags win over the config file
    assert run(capsys, "--config", cfgp, "build", "dp", 0, 0, 2, "--seed", 1)[0] == 0
    assert (tmp_path / "o" / "dp_r0_n0-2_s1.json").exists()
    (tmp_path / "broken.json").write_text("{")
    assert run(capsys, "--config", tmp_path / "broken.json", "build", "dp", 0, 0, 2)[0] == 2


def test_reproduce_small(tmp_path, capsys):
    t0 = time.perf_counter()
    code, out, _ = run(capsys, "reproduce", "--n1", 1, "--n2", 3, "--r-max", 2, "--concise",
                       "--csv", tmp_path / "t.csv", "--markdown", tmp_path / "t.md", "--workers", 2)
    assert time.perf_counter() - t0 < 60
    assert code == 0
    assert (tmp_path / "t.md").read_text() == out
    rows = list(csv.DictReader(io.StringIO((tmp_path / "t.csv").read_text())))
    by = {}
    for row in rows:
        by.setdefault(row["hierarchy"], []).append(float(row["optv"]))
    assert set(by) == {"dp", "yildirim", "zvp", "nn", "lasserre"}
    for h in ("dp", "zvp", "nn"):
        assert all(b >= a - 1e-6 for a, b in zip(by[h], by[h][1:]))
    for h in ("yildirim", "lasserre"):
        assert all(b <= a + 1e-6 for a, b in zip(by[h], by[h][1:]))
    assert max(max(by[h]) for h in ("dp", "zvp", "nn")) <= min(min(by[h]) for h in ("yildirim", "lasserre")) + 1e-6
    assert all(row["underflow"] in ("0", "") for row in rows)


def test_reproduce_budget(capsys):
    code, out, _ = run(capsys, "reproduce", "--n1", 0, "--n2", 2, "--r-max", 3, "--budget-seconds", 0,
                       "--hierarchies", "dp,lasserre")
    assert code == 4 and "(budget)" in out
    assert run(capsys, "reproduce", "--n1", 0, "--n2", 2, "--r-max", 1, "--hierarchies", "xx")[0] == 2


def test_underflow_flag_in_table():
    cells = [Cell("lasserre", 0, 0, "Optimal", 1.5, 0.1, 0.2, True, False),
             Cell("lasserre", 1, 0, "Optimal", 1.2, 0.1, 0.2, False, False)]
    csv_text, md = render_tables(cells, ["lasserre"])
    assert "(underflow)" in md.splitlines()[2] and "(underflow)" not in md.splitlines()[3]
    assert csv_text.splitlines()[1].split(",")[7] == "1"


@pytest.mark.parametrize("matrix,shape,expect", [
    ([[1, 0], [0, 1]], (0, 2), "certified-copositive(dp, r=0)"),
    ([[-1, 0], [0, -1]], (0, 2), "refuted("),
    ([[1, 0], [0, -1]], (0, 2), "certified-copositive(nn, r=0)"),
    (np.eye(3).tolist(), (3, 0), "certified-copositive(nn, r=0)"),
])
def test_verify(tmp_path, capsys, matrix, shape, expect):
    path = tmp_path / "A.json"
    path.write_text(json.dumps(matrix))
    code, out, _ = run(capsys, "verify", path, "--n1", shape[0], "--n2", shape[1], "--depth", 0)
    assert code == 0 and out.startswith(expect)
    if expect.startswith("refuted"):
        wit = json.loads(out.split("witness=", 1)[1])
        from symcop.oracle import Witness

        assert Witness.from_dict(wit).check(np.array(matrix, dtype=float))


def test_verify_never_certifies_a_refutable_matrix():
    rng = np.random.default_rng(0)
    s = ConeShape(1, 2)
    for _ in range(10):
        B = rng.standard_normal((3, 3))
        A = B + B.T
        v = cli.verify_matrix(A, s, 1)
        if v.kind == "certified":
            from symcop.oracle import sample_cone_min

            assert sample_cone_min(A, s, 50_000)[0] >= -1e-6 * np.linalg.norm(A)
        if v.kind == "refuted":
            from symcop.oracle import Witness

            assert Witness.from_dict(v.witness).check(A)


def test_verify_invalid(tmp_path, capsys):
    path = tmp_path / "A.txt"
    path.write_text("1 2\n3 4\n")
    assert run(capsys, "verify", path, "--n1", 0, "--n2", 2)[0] == 2
    path.write_text("1 0\n0 1\n")
    assert run(capsys, "verify", path, "--n1", 1, "--n2", 2)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "symcop", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "reproduce" in proc.stdout
