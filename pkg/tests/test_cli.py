"""Command-line front end: argument handling and artifact production."""

import os

import numpy as np
import pytest

from stresstopo import cli, io
from stresstopo.mesh import GridMesh


def _run(argv):
    return cli.main(argv)


def test_optimize_produces_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    status = _run(["optimize", "--problem", "cantilever",
                   "--nelx", "8", "--nely", "4", "--nelz", "1",
                   "--iters", "4", "--checkpoint-interval", "2",
                   "--out", str(out)])
    assert status == 0
    assert (out / "config.txt").exists()
    assert (out / "history.csv").exists()
    data = np.loadtxt(out / "history.csv", delimiter=",", skiprows=1)
    assert data.shape == (4, 6)
    assert (out / "field_0002.vtk").exists()
    assert (out / "field_0004.vtk").exists()
    assert (out / "density_0004.chk").exists()
    mesh = GridMesh(8, 4, 1)
    fields = io.read_vtk_cell_data(mesh, out / "field_0004.vtk")
    assert fields["density"].size == mesh.nele
    summary = capsys.readouterr().out
    assert "cantilever" in summary and "pnorm" in summary


def test_verify_gradient_pass(tmp_path, capsys):
    out = tmp_path / "verify"
    status = _run(["verify-gradient", "--problem", "cantilever",
                   "--nelx", "8", "--nely", "4", "--nelz", "1",
                   "--eps", "1e-5", "--fd-mode", "central",
                   "--gradient-tol", "1e-4", "--out", str(out)])
    assert status == 0
    assert "PASS" in capsys.readouterr().out
    check = np.loadtxt(out / "gradient_check.csv", delimiter=",", skiprows=1)
    assert check.shape == (8 * 4, 4)


def test_verify_gradient_seeded_random(tmp_path, capsys):
    out = tmp_path / "verify-rand"
    status = _run(["verify-gradient", "--problem", "cantilever",
                   "--nelx", "6", "--nely", "3", "--nelz", "1",
                   "--seed", "7", "--eps", "1e-5", "--fd-mode", "central",
                   "--gradient-tol", "1e-4", "--out", str(out)])
    assert status == 0
    assert "PASS" in capsys.readouterr().out


def test_solve_only(tmp_path, capsys):
    out = tmp_path / "solve"
    status = _run(["solve-only", "--problem", "lbracket2d",
                   "--nelx", "12", "--out", str(out)])
    assert status == 0
    assert (out / "field_0000.vtk").exists()
    assert "pnorm" in capsys.readouterr().out


def test_config_file_plus_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("problem = cantilever\nnelx = 8\nnely = 4\nnelz = 1\n"
                   "iters = 2\n")
    out = tmp_path / "cfg-run"
    status = _run(["optimize", "--config", str(cfg), "--iters", "3",
                   "--out", str(out)])
    assert status == 0
    data = np.loadtxt(out / "history.csv", delimiter=",", skiprows=1)
    assert data.shape == (3, 6)
    assert "iters=3" in (out / "config.txt").read_text()


def test_invalid_problem_is_config_error(capsys):
    # argparse rejects unknown problem names with exit status 2
    with pytest.raises(SystemExit) as exc:
        _run(["optimize", "--problem", "bridge"])
    assert exc.value.code == 2


def test_invalid_config_value(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("volfrac = 2.0\n")
    status = _run(["optimize", "--config", str(cfg)])
    assert status == 2
    assert "error" in capsys.readouterr().err


def test_failure_writes_error_log(tmp_path, capsys, monkeypatch):
    # sabotage the optimization stage to exercise the structured-error path
    def boom(*a, **k):
        raise RuntimeError("injected failure")

    monkeypatch.setattr(cli, "run_optimization", boom)
    out = tmp_path / "fail"
    status = _run(["optimize", "--problem", "cantilever", "--nelx", "4",
                   "--nely", "2", "--nelz", "1", "--out", str(out)])
    assert status == 1
    assert "injected failure" in (out / "error.log").read_text()
