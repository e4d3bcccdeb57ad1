"""Command-line front end: optimize, verify-gradient, solve-only."""

import argparse
import os
import sys
import warnings

import numpy as np

from . import io
from .element import ElasticityModel, element_matrices
from .filters import build_filter, filter_density
from .mesh import build_dof_table
from .optimize import run_optimization
from .problems import PROBLEMS
from .sensitivity import DENSITY_FLOOR, finite_difference_check, \
    pnorm_sensitivity
from .solver import SolverConfig
from .stress import StressParams


def _add_common(p):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--problem",
                   choices=["cantilever", "lbracket2d", "lbracket3d"])
    p.add_argument("--nelx", type=int)
    p.add_argument("--nely", type=int)
    p.add_argument("--nelz", type=int)
    p.add_argument("--volfrac", type=float)
    p.add_argument("--pl", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--solver", choices=["auto", "direct", "pcg"])
    p.add_argument("--tol", type=float)
    p.add_argument("--maxit", type=int)
    p.add_argument("--move", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint-interval", type=int,
                   dest="checkpoint_interval")
    p.add_argument("--paper-literal-filter", action="store_const", const=True,
                   dest="paper_literal_filter")
    p.add_argument("--eps", type=float)
    p.add_argument("--fd-mode", choices=["forward", "central"],
                   dest="fd_mode")
    p.add_argument("--gradient-tol", type=float, dest="gradient_tol")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stresstopo",
        description="Stress-based topology optimization: p-norm von Mises "
                    "minimization under a volume constraint")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in [
            ("optimize", "run the MMA optimization loop"),
            ("verify-gradient", "finite-difference check of the adjoint "
                                "gradient"),
            ("solve-only", "single FEM solve and stress evaluation")]:
        _add_common(sub.add_parser(name, help=descr))
    return parser


def _config_from_args(args) -> io.RunConfig:
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config") and v is not None}
    return io.parse_config(args.config, **overrides)


def _build_problem(cfg: io.RunConfig):
    factory = PROBLEMS[cfg.problem]
    dims = {}
    for key in ("nelx", "nely", "nelz"):
        if getattr(cfg, key) is not None:
            dims[key] = getattr(cfg, key)
    kwargs = dict(
        volfrac=cfg.volfrac,
        params=StressParams(q=cfg.q, p=cfg.p),
        radius=cfg.radius,
        solver=SolverConfig(method=cfg.solver, tol=cfg.tol, maxit=cfg.maxit),
    )
    if cfg.iters is not None:
        kwargs["iterations"] = cfg.iters
    return factory(**dims, **kwargs)


def run(cfg: io.RunConfig, command: str = "optimize") -> int:
    """Execute one run; returns a process exit status."""
    try:
        problem = _build_problem(cfg)
    except (ValueError, io.ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    os.makedirs(cfg.out, exist_ok=True)
    io.write_config_echo(cfg, os.path.join(cfg.out, "config.txt"))
    model = ElasticityModel(pl=cfg.pl)
    try:
        if command == "optimize":
            return _run_optimize(cfg, problem, model)
        if command == "verify-gradient":
            return _run_verify(cfg, problem, model)
        if command == "solve-only":
            return _run_solve_only(cfg, problem, model)
        print(f"error: unknown command {command!r}", file=sys.stderr)
        return 2
    except Exception as err:  # surface stage failures as structured errors
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        with open(os.path.join(cfg.out, "error.log"), "w") as fh:
            fh.write(f"{type(err).__name__}: {err}\n")
        return 1


def _run_optimize(cfg, problem, model):
    mesh = problem.mesh
    history_path = os.path.join(cfg.out, "history.csv")
    if os.path.exists(history_path):
        os.unlink(history_path)

    def checkpoint(row, x, x_phys, sens):
        io.write_history_csv([row], history_path, append=True)
        if row.iter % cfg.checkpoint_interval == 0:
            io.write_vtk(mesh, x_phys, sens.field.mises,
                         os.path.join(cfg.out, f"field_{row.iter:04d}.vtk"))
            io.write_checkpoint(
                x, os.path.join(cfg.out, f"density_{row.iter:04d}.chk"))

    result = run_optimization(problem, model=model, move=cfg.move,
                              paper_literal_filter=cfg.paper_literal_filter,
                              callback=checkpoint)
    last = result.history[-1]
    final_sens = _evaluate(problem, model, result.x_phys, cfg)
    io.write_vtk(mesh, result.x_phys, final_sens.field.mises,
                 os.path.join(cfg.out, f"field_{last.iter:04d}.vtk"))
    io.write_checkpoint(result.x,
                        os.path.join(cfg.out, f"density_{last.iter:04d}.chk"))
    print(f"{problem.name}: pnorm {result.history[0].pnorm:.4f} -> "
          f"{last.pnorm:.4f}, max von Mises {last.max_vm:.4f}, "
          f"volume {last.volume:.4f} ({last.iter} iterations)")
    return 0


def _evaluate(problem, model, x_phys, cfg):
    mesh = problem.mesh
    table = build_dof_table(mesh)
    em = element_matrices(model.nu)
    return pnorm_sensitivity(x_phys, mesh, table, em, model, problem.params,
                             problem.load_vector(), problem.fixed_dofs,
                             problem.solver)


def _verification_density(cfg, problem):
    if cfg.seed is not None:
        rng = np.random.default_rng(cfg.seed)
        return 0.9 * rng.random(problem.mesh.nele) + 0.1
    x = np.full(problem.mesh.nele, cfg.volfrac)
    x[problem.passive] = DENSITY_FLOOR
    return x


def _run_verify(cfg, problem, model):
    mesh = problem.mesh
    table = build_dof_table(mesh)
    em = element_matrices(model.nu)
    F = problem.load_vector()
    x = _verification_density(cfg, problem)
    sens = pnorm_sensitivity(x, mesh, table, em, model, problem.params, F,
                             problem.fixed_dofs, problem.solver)

    def pnorm_of(xv):
        return pnorm_sensitivity(xv, mesh, table, em, model, problem.params,
                                 F, problem.fixed_dofs,
                                 problem.solver).pnorm

    report = finite_difference_check(pnorm_of, x, sens.grad, eps=cfg.eps,
                                     mode=cfg.fd_mode)
    report.write_csv(os.path.join(cfg.out, "gradient_check.csv"))
    ok = report.max_err <= cfg.gradient_tol
    print(f"gradient check ({cfg.fd_mode}, eps={cfg.eps:g}): "
          f"max rel err {report.max_err:.3e}, "
          f"median {report.median_err:.3e} -> "
          f"{'PASS' if ok else 'FAIL'} (tol {cfg.gradient_tol:g})")
    return 0 if ok else 1


def _run_solve_only(cfg, problem, model):
    x = problem.initial_density()
    filt = build_filter(problem.mesh, problem.radius)
    x_phys = filter_density(filt, x)
    x_phys[problem.passive] = DENSITY_FLOOR
    sens = _evaluate(problem, model, x_phys, cfg)
    io.write_vtk(problem.mesh, x_phys, sens.field.mises,
                 os.path.join(cfg.out, "field_0000.vtk"))
    print(f"{problem.name}: pnorm {sens.pnorm:.4f}, "
          f"max von Mises {sens.field.mises.max():.4f}, "
          f"volume {np.mean(x_phys):.4f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except (io.ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if cfg.p > 30.0:
        warnings.warn(f"p = {cfg.p} may be ill-conditioned", stacklevel=1)
    return run(cfg, args.command)


if __name__ == "__main__":
    sys.exit(main())
