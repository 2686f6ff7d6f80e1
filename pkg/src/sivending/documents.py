"""JSON problem documents: parsing, validation and serialisation.

A document is a JSON object::

    {
      "name": "zs_lossless",
      "mode": "decoder",
      "alphabets": {"X": ["0", "1"], "A": ["z", "s"], "Y": ["0", "1"]},
      "p_x": [0.5, 0.5],
      "p_y_given_xa": [[[1, 0], [0.5, 0.5]], [[0.5, 0.5], [0, 1]]],
      "rho": [[0, 1], [1, 0]],
      "lambda": [0, 1],
      "d": 0.0,
      "c": [0.0, 0.25, 0.5],
      "solver": {"restarts": 4}
    }

``p_y_given_xa`` is indexed ``[x][a][y]``. Indirect documents give
``p_z_given_x`` (``[x][z]``) and ``p_y_given_xza`` (``[x][z][a][y]``) instead.
Gaussian documents give ``"gaussian": {"var_x": .., "var_n": ..}`` and no
kernels. ``d`` and ``c`` are numbers or ascending lists; ``c`` defaults to
the largest action cost and ``d`` to 0. Probability rows off by at most
``1e-6`` are renormalised with a warning; larger errors are rejected.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, fields, replace
from importlib import resources

import numpy as np

from sivending.problem import MODES, ProblemSpec
from sivending.simplex import SolverConfig

log = logging.getLogger(__name__)

EXACT_TOL = 1e-9
RENORM_TOL = 1e-6
SOLVER_FIELDS = ("max_iters", "objective_tol", "restarts", "seed", "grid_resolution",
                 "envelope_tol", "envelope_rounds", "lambda_points", "oracle_budget")
BUNDLED = ("zs_lossless", "zs_cost", "ternary", "observe_or_not_identity", "observe_or_not_erasure",
           "gaussian_unit", "markov_bsc", "indirect_bsc")


class DocumentError(ValueError):
    """Malformed problem document; the message names the offending field or line."""


@dataclass(frozen=True)
class ProblemDocument:
    name: str
    mode: str
    spec: ProblemSpec | None
    d: tuple[float, ...]
    c: tuple[float, ...]
    gaussian: tuple[float, float] | None = None
    alphabets: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)

    def config(self, **overrides) -> SolverConfig:
        """Solver configuration from the document, with command-line overrides on top."""
        cfg = replace(SolverConfig(), **self.solver)
        extra = {k: v for k, v in overrides.items() if v is not None}
        return replace(cfg, **extra) if extra else cfg


def _array(raw, path, ndim):
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise DocumentError(f"{path}: expected a rectangular numeric array") from None
    if arr.ndim != ndim:
        raise DocumentError(f"{path}: expected {ndim} nested levels, got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DocumentError(f"{path}: non-finite entry")
    return arr


def _index(path, idx):
    return path + "".join(f"[{i}]" for i in idx)


def _normalised(arr, path):
    """Check that the last axis sums to one; renormalise small deviations."""
    if np.any(arr < 0):
        bad = np.argwhere(arr < 0)[0]
        raise DocumentError(f"{_index(path, bad)} is negative")
    sums = arr.sum(axis=-1)
    err = np.abs(sums - 1.0)
    if np.any(err > RENORM_TOL):
        idx = np.unravel_index(int(np.argmax(err > RENORM_TOL)), sums.shape)
        raise DocumentError(f"{_index(path, idx)} sums to {sums[idx]:.6g}, not 1")
    if np.any(err > EXACT_TOL):
        idx = np.unravel_index(int(np.argmax(err)), sums.shape)
        log.warning("%s sums to %.12g; renormalised", _index(path, idx), sums[idx])
    return arr / sums[..., None]


def _grid(raw, path, default):
    if raw is None:
        return (default,)
    values = [raw] if isinstance(raw, (int, float)) else raw
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise DocumentError(f"{path}: expected a number or a list of numbers") from None
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise DocumentError(f"{path}: expected a number or a nonempty list of numbers")
    if np.any(np.diff(arr) < 0):
        raise DocumentError(f"{path}: grid must be ascending")
    return tuple(float(v) for v in arr)


def from_dict(doc: dict) -> ProblemDocument:
    """Validate a decoded JSON object and build the document."""
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    mode = doc.get("mode")
    if mode not in MODES:
        raise DocumentError(f"mode: expected one of {MODES}, got {mode!r}")
    name = str(doc.get("name", "unnamed"))
    solver = doc.get("solver", {}) or {}
    if not isinstance(solver, dict):
        raise DocumentError("solver: expected an object")
    unknown = set(solver) - set(SOLVER_FIELDS)
    if unknown:
        raise DocumentError(f"solver: unknown field {sorted(unknown)[0]!r}")
    try:
        replace(SolverConfig(), **solver)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"solver: {exc}") from None
    alphabets = doc.get("alphabets", {}) or {}
    if mode == "gaussian":
        g = doc.get("gaussian")
        if not isinstance(g, dict) or "var_x" not in g or "var_n" not in g:
            raise DocumentError("gaussian: expected an object with var_x and var_n")
        var_x, var_n = float(g["var_x"]), float(g["var_n"])
        if not (var_x > 0 and var_n > 0):
            raise DocumentError("gaussian: variances must be positive")
        d = _grid(doc.get("d"), "d", 0.0)
        c = _grid(doc.get("c"), "c", 0.0)
        if min(d) <= 0 or min(c) < 0:
            raise DocumentError("d must be positive and c nonnegative in gaussian mode")
        return ProblemDocument(name, mode, None, d, c, (var_x, var_n), alphabets, solver)
    for key in ("p_x", "rho", "lambda"):
        if key not in doc:
            raise DocumentError(f"{key}: missing")
    px = _normalised(_array(doc["p_x"], "p_x", 1), "p_x")
    rho = _array(doc["rho"], "rho", 2)
    cost = _array(doc["lambda"], "lambda", 1)
    kernels = {}
    if mode == "indirect":
        for key, nd in (("p_z_given_x", 2), ("p_y_given_xza", 4)):
            if key not in doc:
                raise DocumentError(f"{key}: missing (required in indirect mode)")
            kernels[key] = _normalised(_array(doc[key], key, nd), key)
        pz, py = kernels["p_z_given_x"], kernels["p_y_given_xza"]
        if py.shape[:3] != (px.size, pz.shape[1], cost.size):
            raise DocumentError(f"p_y_given_xza: shape {py.shape[:3]} must be (|X|, |Z|, |A|) = "
                                f"({px.size}, {pz.shape[1]}, {cost.size})")
        args = dict(p_y_given_xa=None, p_z_given_x=pz, p_y_given_xza=py.reshape(-1, py.shape[-1]))
    else:
        if "p_y_given_xa" not in doc:
            raise DocumentError("p_y_given_xa: missing")
        w = _normalised(_array(doc["p_y_given_xa"], "p_y_given_xa", 3), "p_y_given_xa")
        if w.shape[:2] != (px.size, cost.size):
            raise DocumentError(f"p_y_given_xa: shape {w.shape[:2]} must be (|X|, |A|) = "
                                f"({px.size}, {cost.size})")
        args = dict(p_y_given_xa=w.reshape(-1, w.shape[-1]))
    for axis, size in (("X", px.size), ("A", cost.size), ("Xhat", rho.shape[1])):
        names = alphabets.get(axis)
        if names is not None and len(names) != size:
            raise DocumentError(f"alphabets.{axis}: {len(names)} names for {size} symbols")
    try:
        spec = ProblemSpec(px, rho=rho, cost=cost, mode=mode, **args)
    except ValueError as exc:
        raise DocumentError(str(exc)) from None
    d = _grid(doc.get("d"), "d", 0.0)
    c = _grid(doc.get("c"), "c", float(cost.max()))
    return ProblemDocument(name, mode, spec, d, c, None, alphabets, solver)


def loads(text: str) -> ProblemDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(raw)


def load(path) -> ProblemDocument:
    """Read a document from a path or, failing that, a bundled instance name."""
    if str(path) in BUNDLED:
        return bundled(str(path))
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from None
    return loads(text)


def bundled(name: str) -> ProblemDocument:
    if name not in BUNDLED:
        raise DocumentError(f"no bundled instance {name!r}; available: {', '.join(BUNDLED)}")
    text = resources.files("sivending").joinpath("instances", f"{name}.json").read_text("utf-8")
    return loads(text)


def to_dict(doc: ProblemDocument) -> dict:
    out = {"name": doc.name, "mode": doc.mode}
    if doc.alphabets:
        out["alphabets"] = doc.alphabets
    spec = doc.spec
    if spec is None:
        out["gaussian"] = {"var_x": doc.gaussian[0], "var_n": doc.gaussian[1]}
    else:
        out["p_x"] = spec.px.mass.tolist()
        if spec.mode == "indirect":
            out["p_z_given_x"] = spec.p_z_given_x.rows.tolist()
            shape = (spec.n_x, spec.n_z, spec.n_actions, spec.n_y)
            out["p_y_given_xza"] = spec.p_y_given_xza.rows.reshape(shape).tolist()
        else:
            out["p_y_given_xa"] = spec.w.tolist()
        out["rho"] = spec.rho.values.tolist()
        out["lambda"] = spec.lam.tolist()
    out["d"] = list(doc.d)
    out["c"] = list(doc.c)
    if doc.solver:
        out["solver"] = dict(doc.solver)
    return out


def dumps(doc: ProblemDocument) -> str:
    return json.dumps(to_dict(doc), indent=2)


def config_digest(cfg: SolverConfig) -> str:
    """Short stable hash of a solver configuration."""
    payload = json.dumps({f.name: repr(getattr(cfg, f.name)) for f in fields(cfg)}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]
