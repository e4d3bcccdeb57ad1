"""Run configuration, VTK field export, and CSV/checkpoint persistence."""

import os
import tempfile
from dataclasses import dataclass, fields

import numpy as np

from .mesh import GridMesh


def _atomic_write(path, text):
    """Write via temp file + rename so partial files never appear."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _vtk_cell_order(mesh: GridMesh) -> np.ndarray:
    """Permutation from internal element order to VTK cell order.

    Internal: e = k*nelx*nely + i*nely + r with r the row from the top;
    VTK cells run x fastest, then y (bottom up), then z.
    """
    nely, nelx, nelz = mesh.nely, mesh.nelx, mesh.nelz
    r, i, k = np.meshgrid(np.arange(nely), np.arange(nelx), np.arange(nelz),
                          indexing="ij")
    e = (k * nelx * nely + i * nely + r).ravel()
    j = nely - 1 - r.ravel()
    vtk = k.ravel() * nelx * nely + j * nelx + i.ravel()
    perm = np.empty(mesh.nele, dtype=np.int64)
    perm[vtk] = e
    return perm


def write_vtk(mesh: GridMesh, density, mises, path):
    """Legacy ASCII structured-points file with cell arrays
    "density" and "von_mises" on the unit-spaced element grid."""
    density = np.asarray(density, dtype=float).ravel()
    mises = np.asarray(mises, dtype=float).ravel()
    if density.size != mesh.nele or mises.size != mesh.nele:
        raise ValueError("field size does not match mesh element count")
    perm = _vtk_cell_order(mesh)
    lines = [
        "# vtk DataFile Version 3.0",
        "stresstopo density and von Mises fields",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {mesh.nelx + 1} {mesh.nely + 1} {mesh.nelz + 1}",
        "ORIGIN 0 0 0",
        "SPACING 1 1 1",
        f"CELL_DATA {mesh.nele}",
        "SCALARS density double 1",
        "LOOKUP_TABLE default",
    ]
    lines += [f"{v:.17g}" for v in density[perm]]
    lines += ["SCALARS von_mises double 1", "LOOKUP_TABLE default"]
    lines += [f"{v:.17g}" for v in mises[perm]]
    try:
        _atomic_write(path, "\n".join(lines) + "\n")
    except OSError as err:
        raise OSError(f"failed writing VTK file {path}: {err}") from err


def read_vtk_cell_data(mesh: GridMesh, path):
    """Re-parse cell arrays from write_vtk output, in internal order."""
    with open(path) as fh:
        tokens = fh.read().splitlines()
    perm = _vtk_cell_order(mesh)
    inv = np.empty_like(perm)
    out = {}
    idx = 0
    while idx < len(tokens):
        line = tokens[idx]
        if line.startswith("SCALARS"):
            name = line.split()[1]
            vals = np.array([float(t) for t in
                             tokens[idx + 2: idx + 2 + mesh.nele]])
            field = np.empty(mesh.nele)
            field[perm] = vals  # undo the VTK ordering
            out[name] = field
            idx += 2 + mesh.nele
        else:
            idx += 1
    return out


HISTORY_HEADER = "iter,pnorm,max_vm,volume,dx_inf,wall_time"


def write_history_csv(history, path, append: bool = False):
    """History rows to CSV; append mode skips the header if file exists."""
    new_file = not (append and os.path.exists(path))
    mode = "a" if append else "w"
    with open(path, mode) as fh:
        if new_file or not append:
            fh.write(HISTORY_HEADER + "\n")
        for row in history:
            fh.write(f"{row.iter},{row.pnorm:.17g},{row.max_vm:.17g},"
                     f"{row.volume:.17g},{row.dx_inf:.17g},"
                     f"{row.wall_time:.6f}\n")


def write_checkpoint(x, path):
    """Raw density vector, one value per line, full precision."""
    text = "\n".join(f"{v:.17g}" for v in np.asarray(x, float).ravel())
    _atomic_write(path, text + "\n")


def read_checkpoint(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=1)


@dataclass
class RunConfig:
    """Validated run parameters; defaults are the cantilever benchmark's."""

    problem: str = "cantilever"
    nelx: int = None     # None = problem default dimensions
    nely: int = None
    nelz: int = None
    volfrac: float = 0.3
    pl: float = 3.0
    q: float = 0.5
    p: float = 10.0
    radius: float = 2.5
    solver: str = "auto"
    tol: float = 1e-8
    maxit: int = 5000
    move: float = 0.1
    iters: int = None    # None = problem default budget
    out: str = "out"
    seed: int = None
    checkpoint_interval: int = 20
    paper_literal_filter: bool = False
    eps: float = 1e-4
    fd_mode: str = "forward"
    gradient_tol: float = 1e-2

    def validate(self):
        if self.problem not in ("cantilever", "lbracket2d", "lbracket3d"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        checks = [
            (not 0.0 < self.volfrac < 1.0, "volfrac must be in (0, 1)"),
            (self.pl < 1.0, "pl must be >= 1"),
            (self.q < 0.0, "q must be >= 0"),
            (self.p < 1.0, "p must be >= 1"),
            (self.radius <= 0.0, "radius must be positive"),
            (self.solver not in ("auto", "direct", "pcg"),
             f"unknown solver {self.solver!r}"),
            (self.tol <= 0.0, "tol must be positive"),
            (self.maxit < 1, "maxit must be >= 1"),
            (self.move <= 0.0, "move must be positive"),
            (self.eps <= 0.0, "eps must be positive"),
            (self.fd_mode not in ("forward", "central"),
             f"unknown fd mode {self.fd_mode!r}"),
            (self.checkpoint_interval < 1,
             "checkpoint interval must be >= 1"),
        ]
        for bad, msg in checks:
            if bad:
                raise ConfigError(msg)
        return self


class ConfigError(ValueError):
    """Invalid or unparsable run configuration."""


_INT_KEYS = {"nelx", "nely", "nelz", "iters", "seed", "maxit",
             "checkpoint_interval"}
_FLOAT_KEYS = {"volfrac", "pl", "q", "p", "radius", "tol", "move", "eps",
               "gradient_tol"}
_BOOL_KEYS = {"paper_literal_filter"}


def parse_config(path=None, **overrides) -> RunConfig:
    """Flat key=value file plus keyword overrides; unknown keys rejected."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    if path is not None:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, "
                                      f"got {raw.strip()!r}")
                key, val = (part.strip() for part in line.split("=", 1))
                if key not in known:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _coerce(key, val, f"{path}:{lineno}")
    for key, val in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if val is not None:
            values[key] = val
    return RunConfig(**values).validate()


def _coerce(key, val, where):
    try:
        if key in _INT_KEYS:
            return int(val)
        if key in _FLOAT_KEYS:
            return float(val)
        if key in _BOOL_KEYS:
            if val.lower() in ("1", "true", "yes"):
                return True
            if val.lower() in ("0", "false", "no"):
                return False
            raise ValueError(val)
        return val
    except ValueError:
        raise ConfigError(f"{where}: bad value {val!r} for key {key!r}") \
            from None


def write_config_echo(cfg: RunConfig, path):
    lines = [f"{f.name}={getattr(cfg, f.name)}" for f in fields(cfg)
             if getattr(cfg, f.name) is not None]
    _atomic_write(path, "\n".join(lines) + "\n")
