"""Problem descriptions shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from sivending.info import (
    CostVector,
    DistortionMatrix,
    ProbVector,
    ShapeError,
    StochasticKernel,
)

MODES = (
    "decoder",
    "decoder-independent",
    "causal",
    "indirect",
    "encoder-lossless",
    "encoder-markov",
    "encoder-bounds",
    "gaussian",
)

MARKOV_TOL = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    """A side-information vending instance.

    ``p_y_given_xa`` has one row per pair ``(x, a)`` (row ``x * |A| + a``).
    In indirect mode the encoder sees ``Z`` through ``p_z_given_x`` and the
    side information is drawn from ``p_y_given_xza`` (rows ``(x, z, a)``);
    ``p_y_given_xa`` is then ignored and may be ``None``.
    """

    px: ProbVector
    p_y_given_xa: StochasticKernel | None
    rho: DistortionMatrix
    cost: CostVector
    mode: str = "decoder"
    p_z_given_x: StochasticKernel | None = None
    p_y_given_xza: StochasticKernel | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        for name, kind in (("px", ProbVector), ("rho", DistortionMatrix), ("cost", CostVector)):
            value = getattr(self, name)
            if not isinstance(value, kind):
                object.__setattr__(self, name, kind(value))
        for name in ("p_y_given_xa", "p_z_given_x", "p_y_given_xza"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, StochasticKernel):
                object.__setattr__(self, name, StochasticKernel(np.asarray(value, float).reshape(
                    -1, np.shape(value)[-1])))
        indirect = self.p_z_given_x is not None or self.p_y_given_xza is not None
        if (self.mode == "indirect") != indirect:
            raise ValueError("indirect kernels must be given exactly when mode = 'indirect'")
        if indirect and (self.p_z_given_x is None or self.p_y_given_xza is None):
            raise ValueError("indirect mode needs both p_z_given_x and p_y_given_xza")
        nx, na = self.n_x, self.n_actions
        if self.rho.values.shape[0] != nx:
            raise ShapeError("X", f"rho has {self.rho.values.shape[0]} rows but |X| = {nx}")
        if indirect:
            if self.p_z_given_x.input_size != nx:
                raise ShapeError("X", "p_z_given_x rows must match |X|")
            nz = self.p_z_given_x.output_size
            if self.p_y_given_xza.input_size != nx * nz * na:
                raise ShapeError("A", f"p_y_given_xza needs |X||Z||A| = {nx * nz * na} rows")
        else:
            if self.p_y_given_xa is None:
                raise ValueError("p_y_given_xa is required outside indirect mode")
            if self.p_y_given_xa.input_size != nx * na:
                raise ShapeError("A", f"p_y_given_xa has {self.p_y_given_xa.input_size} rows; "
                                      f"expected |X||A| = {nx * na}")

    @property
    def n_x(self) -> int:
        return self.px.alphabet_size

    @property
    def n_actions(self) -> int:
        return self.cost.values.size

    @property
    def n_xhat(self) -> int:
        return self.rho.values.shape[1]

    @property
    def n_z(self) -> int:
        return self.p_z_given_x.output_size if self.p_z_given_x is not None else self.n_x

    @property
    def n_y(self) -> int:
        if self.mode == "indirect":
            return self.p_y_given_xza.output_size
        return self.p_y_given_xa.output_size

    @property
    def w(self) -> np.ndarray:
        """P_{Y|X,A} as an ``(X, A, Y)`` tensor."""
        if self.mode == "indirect":
            raise ValueError("indirect instances have no P_Y|X,A; use p_y_given_xza")
        return self.p_y_given_xa.rows.reshape(self.n_x, self.n_actions, self.n_y)

    @property
    def lam(self) -> np.ndarray:
        return self.cost.values

    @property
    def cost_range(self) -> tuple[float, float]:
        return float(self.lam.min()), float(self.lam.max())

    def with_mode(self, mode: str) -> "ProblemSpec":
        return ProblemSpec(self.px, self.p_y_given_xa, self.rho, self.cost, mode,
                           self.p_z_given_x, self.p_y_given_xza)

    def is_markov(self, tol: float = MARKOV_TOL) -> bool:
        """True when P_{Y|X,A} does not depend on x."""
        w = self.w
        return bool(np.all(np.abs(w - w[:1]) <= tol))

    @cached_property
    def source_model(self) -> "SourceModel":
        return SourceModel.from_spec(self)


@dataclass(frozen=True)
class SourceModel:
    """Array view of a decoder-side instance as seen by the encoder.

    ``ps`` is the law of the encoder's observation ``S`` (X itself, or Z in
    the indirect case), ``w[s, a, y]`` the induced side-information channel
    and ``wd[s, a, y, xh]`` the expected distortion of reproducing ``xh``
    jointly with seeing ``y``, i.e. ``E[rho(X, xh) 1{Y = y} | S = s, A = a]``.
    """

    ps: np.ndarray
    w: np.ndarray
    wd: np.ndarray
    cost: np.ndarray

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> "SourceModel":
        rho = spec.rho.values
        if spec.mode == "indirect":
            px = spec.px.mass
            pxz = px[:, None] * spec.p_z_given_x.rows
            pz = pxz.sum(axis=0)
            with np.errstate(invalid="ignore", divide="ignore"):
                px_given_z = np.where(pz > 0, pxz / pz, 0.0)
            w3 = spec.p_y_given_xza.rows.reshape(spec.n_x, spec.n_z, spec.n_actions, spec.n_y)
            joint = px_given_z[:, :, None, None] * w3
            w = joint.sum(axis=0)
            wd = np.einsum("xzay,xh->zayh", joint, rho)
            ps = pz
        else:
            ps = spec.px.mass
            w = spec.w
            wd = w[:, :, :, None] * rho[:, None, None, :]
        return cls(np.asarray(ps, float), np.asarray(w, float), np.asarray(wd, float),
                   np.asarray(spec.lam, float))

    @property
    def n_s(self) -> int:
        return self.ps.size

    @property
    def n_actions(self) -> int:
        return self.cost.size

    @property
    def n_y(self) -> int:
        return self.w.shape[2]

    @property
    def n_xhat(self) -> int:
        return self.wd.shape[3]

    def min_distortion_per_symbol(self) -> np.ndarray:
        """Least expected distortion for each ``(s, a)`` when the decoder knows ``s``."""
        return self.wd.min(axis=3).sum(axis=2)

    def min_distortion(self) -> float:
        return float(self.ps @ self.min_distortion_per_symbol().min(axis=1))


@dataclass(frozen=True)
class GaussianSpec:
    """Gaussian source X ~ N(0, var_x), side information Y = X + A + N, N ~ N(0, var_n)."""

    var_x: float
    var_n: float
    d: float
    c: float

    def __post_init__(self):
        if not self.var_x > 0 or not self.var_n > 0:
            raise ValueError("variances must be positive")
        if not self.d > 0:
            raise ValueError("distortion must be positive")
        if not self.c >= 0:
            raise ValueError("cost must be nonnegative")
