import numpy as np
import pytest

from pide_mc.harness import read_csv, read_manifest, read_snapshot
from pide_mc.harness.cli import build_parser, main, resolve


def test_solve_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["solve", "--problem", "example1", "--dt", "0.25", "--paths", "200",
               "--level", "2", "--n-eval", "500", "--out", str(out)])
    assert rc == 0
    assert "l2_error" in capsys.readouterr().out
    d, level, pts, vals = read_snapshot(out / "solution.bin")
    assert (d, level, len(pts)) == (2, 2, 5) and np.all(np.isfinite(vals))
    man = read_manifest(out / "manifest.txt")
    assert man["problem"] == "example1" and man["config"]["m_paths"] == 200
    row = read_csv(out / "errors.csv")[0]
    assert row["l2_error"] > 0 and row["dt"] == 0.25


def test_solve_is_reproducible(tmp_path):
    args = ["solve", "--dt", "0.5", "--paths", "100", "--level", "2", "--n-eval", "100"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "solution.bin").read_bytes() == (tmp_path / "b" / "solution.bin").read_bytes()


def test_sweep_writes_table(tmp_path, capsys):
    rc = main(["sweep", "--axis", "dt", "--values", "2^-1,2^-2,2^-3", "--paths", "100",
               "--level", "2", "--n-eval", "500", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [r["dt"] for r in rows] == [0.5, 0.25, 0.125]
    assert rows[0]["rate"] is None and rows[1]["rate"] is not None
    assert "fitted slope" in capsys.readouterr().out


def test_reference_then_solve_against_it(tmp_path, capsys):
    ref = tmp_path / "ref"
    base = ["--problem", "example3", "--dim", "3", "--alpha", "1.5", "--level", "2", "--n-eval", "200"]
    assert main(["reference", *base, "--dt", "0.25", "--paths", "50", "--out", str(ref)]) == 0
    assert (ref / "reference.bin").exists()
    rc = main(["solve", *base, "--dt", "0.5", "--paths", "50", "--reference", str(ref),
               "--out", str(tmp_path / "run")])
    assert rc == 0
    assert read_csv(tmp_path / "run" / "errors.csv")[0]["l2_error"] >= 0


def test_reference_problem_mismatch(tmp_path, capsys):
    ref = tmp_path / "ref"
    main(["reference", "--dt", "0.5", "--paths", "20", "--level", "2", "--out", str(ref)])
    rc = main(["solve", "--problem", "example2", "--dim", "3", "--dt", "0.5", "--paths", "20",
               "--level", "2", "--reference", str(ref), "--out", str(tmp_path / "x")])
    assert rc == 2 and "reference" in capsys.readouterr().err


def test_long_guard(tmp_path, capsys):
    rc = main(["solve", "--problem", "example2", "--dim", "100", "--out", str(tmp_path)])
    assert rc == 2 and "--long" in capsys.readouterr().err


def test_missing_reference_for_example3(tmp_path, capsys):
    rc = main(["sweep", "--problem", "example3", "--dim", "2", "--axis", "dt",
               "--values", "0.5,0.25,0.125", "--level", "1", "--out", str(tmp_path)])
    assert rc == 2 and "reference" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg_file = tmp_path / "c.yaml"
    cfg_file.write_text("solver:\n  dt: 0.5\n  m_paths: 300\ngrid:\n  level: 2\n")
    args = build_parser().parse_args(["solve", "--config", str(cfg_file), "--paths", "40"])
    cfg = resolve(args)
    assert cfg["dt"] == 0.5 and cfg["paths"] == 40 and cfg["level"] == 2


def test_bad_arguments_exit():
    with pytest.raises(SystemExit):
        main(["solve", "--problem", "example9"])
    with pytest.raises(SystemExit):
        main([])
