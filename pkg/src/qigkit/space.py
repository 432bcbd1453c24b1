"""Weighted finite-dimensional Hilbert space over a sampled configuration space.

A :class:`ConfigurationSpace` is a set of sample points with strictly positive
probability weights.  States are complex vectors over the samples, operators
are dense complex matrices, and all adjoints are taken with respect to the
weighted inner product ``<f, g> = sum_i w_i conj(f_i) g_i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NormalizationError

WEIGHT_SUM_TOL = 1e-12
NORM_TOL = 1e-10


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConfigurationSpace:
    """Sample points with positive weights summing to one.

    ``points`` holds the sample coordinates, shape (N,) for scalar samples or
    (N, k) for tuple-valued ones.  ``weights`` is the discrete reference
    measure.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _as_readonly(np.asarray(self.points, dtype=float)))
        object.__setattr__(self, "weights", _as_readonly(np.asarray(self.weights, dtype=float)))
        if self.weights.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if len(self.points) != len(self.weights):
            raise DimensionMismatchError(
                f"{len(self.points)} points but {len(self.weights)} weights"
            )
        if not np.all(self.weights > 0):
            raise ValueError("all weights must be strictly positive")
        total = float(self.weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1 (got {total!r})")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def coords(self) -> np.ndarray:
        """Sample coordinates as a flat real array (first axis if tuple-valued)."""
        pts = self.points
        return pts if pts.ndim == 1 else pts[:, 0]

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        return complex(np.sum(self.weights * np.conj(f) * g))

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(f) ** 2)))

    def to_json(self) -> str:
        return json.dumps(
            {"points": self.points.tolist(), "weights": self.weights.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "ConfigurationSpace":
        data = json.loads(text)
        return cls(points=np.asarray(data["points"]), weights=np.asarray(data["weights"]))


def uniform_space(points) -> ConfigurationSpace:
    """Equal weights on the given sample points."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    return ConfigurationSpace(points=points, weights=np.full(n, 1.0 / n))


def grid_space(lo: float, hi: float, n: int, reference: str = "uniform",
               scale: float | None = None) -> ConfigurationSpace:
    """Uniform real grid with trapezoid quadrature weights.

    ``reference`` selects the density of the discrete reference measure:
    "uniform" gives plain (normalized) trapezoid weights, "gaussian" tilts
    them by a centered normal density of standard deviation ``scale``.  Both
    are probability weights; they differ only in how mass is spread, which is
    exactly what the measure-change machinery manipulates.
    """
    if n < 2:
        raise ValueError("grid needs at least two points")
    phi = np.linspace(lo, hi, n)
    trap = np.full(n, phi[1] - phi[0])
    trap[0] *= 0.5
    trap[-1] *= 0.5
    if reference == "uniform":
        dens = np.ones(n)
    elif reference == "gaussian":
        s = float(scale) if scale is not None else 0.25 * (hi - lo)
        dens = np.exp(-0.5 * (phi / s) ** 2)
    else:
        raise ValueError(f"unknown reference density {reference!r}")
    w = trap * dens
    return ConfigurationSpace(points=phi, weights=w / w.sum())


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over a configuration space."""

    values: np.ndarray
    space: ConfigurationSpace
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(np.asarray(self.values, dtype=complex)))
        if self.values.shape != (self.space.n,):
            raise DimensionMismatchError(
                f"state has {self.values.shape} values on an {self.space.n}-point space"
            )
        if self.normalized and abs(self.norm() ** 2 - 1.0) > NORM_TOL:
            raise NormalizationError(
                f"state flagged normalized but ||psi||^2 = {self.norm() ** 2!r}"
            )

    def norm(self) -> float:
        return self.space.norm(self.values)


def inner_product(f: StateVector, g: StateVector) -> complex:
    """Weighted inner product, antilinear in the first argument."""
    _check_same_space(f.space, g.space)
    return f.space.inner(f.values, g.values)


def _check_same_space(a: ConfigurationSpace, b: ConfigurationSpace):
    if a is b:
        return
    if a.n != b.n:
        raise DimensionMismatchError(f"spaces of size {a.n} and {b.n}")
    if not (np.array_equal(a.weights, b.weights) and np.array_equal(a.points, b.points)):
        raise DimensionMismatchError("operands live on different configuration spaces")


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Dense operator on the weighted space; (A psi)_i = sum_j A_ij psi_j."""

    entries: np.ndarray
    space: ConfigurationSpace

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_readonly(np.asarray(self.entries, dtype=complex)))
        n = self.space.n
        if self.entries.shape != (n, n):
            raise DimensionMismatchError(
                f"operator shape {self.entries.shape} on an {n}-point space"
            )

    def apply(self, psi: StateVector | np.ndarray) -> StateVector:
        vals = psi.values if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
        if isinstance(psi, StateVector):
            _check_same_space(self.space, psi.space)
        return StateVector(values=self.entries @ vals, space=self.space)

    def adjoint(self) -> "LinearOperator":
        """Adjoint for the weighted inner product: (A^+)_ij = (w_j / w_i) conj(A_ji)."""
        w = self.space.weights
        entries = (np.conj(self.entries).T * w[np.newaxis, :]) / w[:, np.newaxis]
        return LinearOperator(entries=entries, space=self.space)

    def one_norm(self) -> float:
        """Max absolute column sum; the operator-norm surrogate used in contracts."""
        return float(np.abs(self.entries).sum(axis=0).max(initial=0.0))

    def selfadjoint_defect(self) -> float:
        return (self - self.adjoint()).one_norm()

    def expectation(self, psi: StateVector) -> complex:
        return inner_product(psi, self.apply(psi))

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        _check_same_space(self.space, other.space)
        return LinearOperator(entries=self.entries @ other.entries, space=self.space)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        _check_same_space(self.space, other.space)
        return LinearOperator(entries=self.entries + other.entries, space=self.space)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        _check_same_space(self.space, other.space)
        return LinearOperator(entries=self.entries - other.entries, space=self.space)

    def __mul__(self, scalar: complex) -> "LinearOperator":
        return LinearOperator(entries=scalar * self.entries, space=self.space)

    __rmul__ = __mul__

    def __neg__(self) -> "LinearOperator":
        return self * (-1.0)


def identity(space: ConfigurationSpace) -> LinearOperator:
    return LinearOperator(entries=np.eye(space.n, dtype=complex), space=space)


def diagonal_operator(values: np.ndarray, space: ConfigurationSpace) -> LinearOperator:
    """Multiplication operator for the given per-sample values."""
    values = np.asarray(values, dtype=complex)
    if values.shape != (space.n,):
        raise DimensionMismatchError("diagonal values do not match the space")
    return LinearOperator(entries=np.diag(values), space=space)


def weighted_adjoint(a: LinearOperator) -> LinearOperator:
    return a.adjoint()


def weighted_outer(f: StateVector, g: StateVector) -> LinearOperator:
    """|f><g| against the weighted dual: entries f_i w_j conj(g_j)."""
    _check_same_space(f.space, g.space)
    w = f.space.weights
    entries = np.outer(f.values, w * np.conj(g.values))
    return LinearOperator(entries=entries, space=f.space)


def projector(psi: StateVector, tol: float = 1e-8) -> LinearOperator:
    """Rank-one orthogonal projector onto the ray of a unit state."""
    defect = abs(psi.norm() ** 2 - 1.0)
    if defect > tol:
        raise NormalizationError(f"projector needs a unit state; ||psi||^2 off by {defect:.3e}")
    return weighted_outer(psi, psi)
