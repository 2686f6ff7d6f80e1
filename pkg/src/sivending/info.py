"""Finite-alphabet probability containers and information measures (bits).

Conventions: log base 2, ``0 log 0 = 0``, masses below ``ZERO_MASS`` are
treated as exact zeros inside logarithms. Conditional kernels indexed by a
pair ``(x, a)`` are flattened row-major, i.e. row ``x * n_actions + a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

ZERO_MASS = 1e-14
NORM_TOL = 1e-12


class ShapeError(ValueError):
    """Raised when array dimensions disagree; ``axis`` names the offending axis."""

    def __init__(self, axis: str, message: str):
        super().__init__(f"axis {axis!r}: {message}")
        self.axis = axis


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ShapeError(name, f"expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProbVector:
    mass: np.ndarray

    def __post_init__(self):
        mass = _frozen(self.mass, 1, "mass")
        if mass.size == 0:
            raise ShapeError("mass", "empty distribution")
        if np.any(mass < 0):
            raise ValueError(f"negative probability in {mass}")
        if abs(mass.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {mass.sum()!r}, not 1")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def normalized(cls, values) -> "ProbVector":
        arr = np.asarray(values, dtype=float)
        return cls(arr / arr.sum())

    @classmethod
    def uniform(cls, n: int) -> "ProbVector":
        return cls(np.full(n, 1.0 / n))

    @property
    def alphabet_size(self) -> int:
        return self.mass.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mass, dtype=dtype)


@dataclass(frozen=True)
class StochasticKernel:
    """Conditional distribution table, one row per conditioning symbol."""

    rows: np.ndarray

    def __post_init__(self):
        rows = _frozen(self.rows, 2, "rows")
        if np.any(rows < 0):
            raise ValueError("negative entry in kernel")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > NORM_TOL)
        if bad.size:
            raise ValueError(f"kernel row {int(bad[0])} sums to {sums[bad[0]]!r}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def normalized(cls, values) -> "StochasticKernel":
        arr = np.asarray(values, dtype=float)
        return cls(arr / arr.sum(axis=1, keepdims=True))

    @classmethod
    def from_tensor(cls, tensor) -> "StochasticKernel":
        """Flatten a ``[x][a]...[y]`` tensor into rows indexed row-major by all but the last axis."""
        arr = np.asarray(tensor, dtype=float)
        return cls(arr.reshape(-1, arr.shape[-1]))

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.rows, dtype=dtype)


@dataclass(frozen=True)
class DistortionMatrix:
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, 2, "values")
        if np.any(values < 0):
            raise ValueError("distortion entries must be nonnegative")
        object.__setattr__(self, "values", values)

    @classmethod
    def hamming(cls, n: int, n_hat: int | None = None) -> "DistortionMatrix":
        n_hat = n if n_hat is None else n_hat
        return cls(1.0 - np.eye(n, n_hat))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class CostVector:
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, 1, "values")
        if np.any(values < 0):
            raise ValueError("action costs must be nonnegative")
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class JointDist:
    tensor: np.ndarray
    axis_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        tensor = np.array(self.tensor, dtype=float)
        labels = tuple(self.axis_labels)
        if len(labels) != tensor.ndim:
            raise ShapeError("labels", f"{len(labels)} labels for a {tensor.ndim}-d tensor")
        if len(set(labels)) != len(labels):
            raise ShapeError("labels", f"duplicate axis labels {labels}")
        if np.any(tensor < 0):
            raise ValueError("negative mass in joint distribution")
        if abs(tensor.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"joint mass is {tensor.sum()!r}, not 1")
        tensor.setflags(write=False)
        object.__setattr__(self, "tensor", tensor)
        object.__setattr__(self, "axis_labels", labels)

    def axis(self, label: str) -> int:
        try:
            return self.axis_labels.index(label)
        except ValueError:
            raise ShapeError(label, f"not one of {self.axis_labels}") from None

    def marginal(self, labels: Iterable[str]) -> np.ndarray:
        """Marginal table over ``labels`` (in the order given)."""
        labels = list(labels)
        keep = [self.axis(lab) for lab in labels]
        drop = tuple(i for i in range(self.tensor.ndim) if i not in keep)
        marg = self.tensor.sum(axis=drop)
        kept_order = sorted(keep)
        return np.transpose(marg, [kept_order.index(i) for i in keep])

    def entropy(self, labels: Iterable[str]) -> float:
        labels = list(labels)
        if not labels:
            return 0.0
        return _entropy_bits(self.marginal(labels))


def _entropy_bits(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > ZERO_MASS]
    return float(-np.sum(p * np.log2(p)))


def entropy(p) -> float:
    """Shannon entropy of a probability vector in bits."""
    if not isinstance(p, ProbVector):
        p = ProbVector(p)
    return min(max(_entropy_bits(p.mass), 0.0), float(np.log2(p.alphabet_size)))


def _axis_set(axes) -> list[str]:
    if isinstance(axes, str):
        return [axes]
    return list(axes)


def conditional_mutual_information(joint: JointDist, axes_a, axes_b, axes_cond=()) -> float:
    """I(A;B|C) in bits for disjoint label sets of ``joint``."""
    a, b, c = _axis_set(axes_a), _axis_set(axes_b), _axis_set(axes_cond)
    if not a or not b:
        raise ShapeError("axes", "mutual information needs two nonempty axis sets")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValueError(f"axis sets overlap: {a}, {b}, {c}")
    value = (joint.entropy(a + c) + joint.entropy(b + c)
             - joint.entropy(a + b + c) - joint.entropy(c))
    return max(value, 0.0)


def mutual_information(joint: JointDist, axes_a, axes_b) -> float:
    return conditional_mutual_information(joint, axes_a, axes_b, ())


def conditional_entropy(joint: JointDist, axes, axes_cond=()) -> float:
    a, c = _axis_set(axes), _axis_set(axes_cond)
    return max(joint.entropy(a + c) - joint.entropy(c), 0.0)


def factorize(px, p_au_given_x, p_y_given_xa) -> JointDist:
    """Joint over (X, A, U, Y) from P_X, P_{A,U|X} and P_{Y|X,A}.

    Columns of ``p_au_given_x`` are the flattened pairs ``(a, u)``; rows of
    ``p_y_given_xa`` are the flattened pairs ``(x, a)``.
    """
    px = px if isinstance(px, ProbVector) else ProbVector(px)
    kau = p_au_given_x if isinstance(p_au_given_x, StochasticKernel) else StochasticKernel(p_au_given_x)
    ky = p_y_given_xa if isinstance(p_y_given_xa, StochasticKernel) else StochasticKernel(p_y_given_xa)
    nx = px.alphabet_size
    if kau.input_size != nx:
        raise ShapeError("X", f"P_AU|X has {kau.input_size} rows but |X| = {nx}")
    if ky.input_size % nx:
        raise ShapeError("A", f"P_Y|XA has {ky.input_size} rows, not a multiple of |X| = {nx}")
    na = ky.input_size // nx
    if kau.output_size % na:
        raise ShapeError("U", f"P_AU|X has {kau.output_size} columns, not a multiple of |A| = {na}")
    nu = kau.output_size // na
    q = kau.rows.reshape(nx, na, nu)
    w = ky.rows.reshape(nx, na, ky.output_size)
    tensor = px.mass[:, None, None, None] * q[:, :, :, None] * w[:, :, None, :]
    return JointDist(tensor, ("X", "A", "U", "Y"))


def factorize_indirect(pxz, p_au_given_z, p_y_given_xza) -> JointDist:
    """Joint over (X, Z, A, U, Y) from P_{X,Z}, P_{A,U|Z} and P_{Y|X,Z,A}.

    ``pxz`` is an ``|X| x |Z|`` table; rows of ``p_y_given_xza`` are the
    flattened triples ``(x, z, a)``.
    """
    pxz = np.asarray(pxz, dtype=float)
    if pxz.ndim != 2:
        raise ShapeError("Z", "P_XZ must be a 2-d table")
    nx, nz = pxz.shape
    kau = p_au_given_z if isinstance(p_au_given_z, StochasticKernel) else StochasticKernel(p_au_given_z)
    ky = p_y_given_xza if isinstance(p_y_given_xza, StochasticKernel) else StochasticKernel(p_y_given_xza)
    if kau.input_size != nz:
        raise ShapeError("Z", f"P_AU|Z has {kau.input_size} rows but |Z| = {nz}")
    if ky.input_size % (nx * nz):
        raise ShapeError("A", f"P_Y|XZA has {ky.input_size} rows, not a multiple of |X||Z|")
    na = ky.input_size // (nx * nz)
    if kau.output_size % na:
        raise ShapeError("U", f"P_AU|Z has {kau.output_size} columns, not a multiple of |A| = {na}")
    nu = kau.output_size // na
    q = kau.rows.reshape(nz, na, nu)
    w = ky.rows.reshape(nx, nz, na, ky.output_size)
    tensor = (pxz[:, :, None, None, None] * q[None, :, :, :, None]
              * w[:, :, :, None, :])
    return JointDist(tensor, ("X", "Z", "A", "U", "Y"))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p!r} outside [0, 1]")
    if p < ZERO_MASS or p > 1.0 - ZERO_MASS:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def bernoulli_rd(p: float, d: float) -> float:
    """Rate-distortion function of a Bernoulli(p) source under Hamming distortion."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"source bias {p!r} outside [0, 1]")
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"distortion {d!r} outside [0, 1]")
    if d >= min(p, 1.0 - p):
        return 0.0
    return max(binary_entropy(p) - binary_entropy(d), 0.0)


def as_array(obj) -> np.ndarray:
    """Plain float array view of a container or array-like."""
    for name in ("mass", "rows", "values", "tensor"):
        if hasattr(obj, name):
            return np.asarray(getattr(obj, name), dtype=float)
    return np.asarray(obj, dtype=float)
