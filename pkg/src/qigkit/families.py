"""Parametric pure-state families and their hydrodynamic velocity fields.

A family maps a parameter point x to a state psi_x(phi) = sqrt(P) * exp(i*S/hbar)
over a weighted sample grid.  From the x-derivatives of the density P and the
phase S come the transport velocity pi = dS/m, the osmotic velocity
u = (hbar/2m) d(ln P), and the complex velocity eta = pi - i*u, which drive
everything downstream (SLD operators, Fisher metrics, holonomy).

Analytic families carry closed-form densities and gradients; tabulated
families hold state vectors on a parameter lattice and differentiate them
with central differences of the pointwise complex logarithm.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryError,
    MeasureMismatchError,
    NodalPointError,
    UnwrapAmbiguityWarning,
)
from .space import ConfigurationSpace, StateVector, grid_space

DENSITY_FLOOR = 1e-300
AMPLITUDE_FLOOR = 1e-150
EVALUATE_NORM_TOL = 1e-6


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0 or self.mass <= 0:
            raise ValueError("hbar and mass must be strictly positive")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class DerivativeScheme:
    """How x-derivatives are taken: closed form or central differences."""

    mode: str = "central"
    step: float = 1e-4
    richardson: bool = False

    def __post_init__(self):
        if self.mode not in ("analytic", "central"):
            raise ValueError(f"unknown derivative mode {self.mode!r}")
        if self.step <= 0:
            raise ValueError("step must be positive")


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Per-sample transport (pi) and osmotic (u) velocities at one base point."""

    pi: np.ndarray  # (N, d) real
    u: np.ndarray   # (N, d) real
    x: np.ndarray   # (d,)

    def __post_init__(self):
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=float))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        if self.pi.shape != self.u.shape:
            raise ValueError("pi and u must have the same shape")

    @property
    def eta(self) -> np.ndarray:
        return self.pi - 1j * self.u

    @property
    def dim(self) -> int:
        return self.pi.shape[1]


def _as_point(x, dim: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dim,):
        raise ValueError(f"parameter point {x!r} does not have dimension {dim}")
    return x


class AnalyticStateFamily:
    """Family with closed-form density, phase, and their x-gradients.

    The evaluators act on the full sample grid of ``space`` (in grid order)
    and return arrays of length N; gradients return (N, dim).
    """

    kind = "analytic"

    def __init__(self, space, constants, dim, density, phase,
                 density_grad, phase_grad, name="custom", params=None):
        self.space = space
        self.constants = constants
        self.dim = dim
        self._density = density
        self._phase = phase
        self._density_grad = density_grad
        self._phase_grad = phase_grad
        self.name = name
        self.params = dict(params or {})

    def density(self, x) -> np.ndarray:
        return np.asarray(self._density(_as_point(x, self.dim)), dtype=float)

    def phase(self, x) -> np.ndarray:
        return np.asarray(self._phase(_as_point(x, self.dim)), dtype=float)

    def density_grad(self, x) -> np.ndarray:
        out = np.asarray(self._density_grad(_as_point(x, self.dim)), dtype=float)
        return out.reshape(self.space.n, self.dim)

    def phase_grad(self, x) -> np.ndarray:
        out = np.asarray(self._phase_grad(_as_point(x, self.dim)), dtype=float)
        return out.reshape(self.space.n, self.dim)

    @property
    def has_analytic_gradients(self) -> bool:
        return True

    def raw_values(self, x) -> np.ndarray:
        """Un-normalized amplitudes sqrt(P) exp(i S / hbar) on the grid."""
        p = self.density(x)
        if np.any(p <= DENSITY_FLOOR):
            raise NodalPointError(f"density hit the nodal floor at x={x!r}")
        return np.sqrt(p) * np.exp(1j * self.phase(x) / self.constants.hbar)


class TabulatedStateFamily:
    """States stored on a rectangular parameter lattice.

    ``axes`` is a tuple of strictly increasing 1-d coordinate arrays, one per
    parameter axis; ``values`` has shape lattice-shape + (N,).
    """

    kind = "tabulated"

    def __init__(self, space, constants, axes, values, scheme=None):
        self.space = space
        self.constants = constants
        self.axes = tuple(np.asarray(a, dtype=float) for a in axes)
        self.dim = len(self.axes)
        self.values = np.asarray(values, dtype=complex)
        expected = tuple(len(a) for a in self.axes) + (space.n,)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape}, expected {expected}")
        self.scheme = scheme or DerivativeScheme(mode="central")

    @property
    def has_analytic_gradients(self) -> bool:
        return False

    def _index_of(self, x) -> tuple:
        x = _as_point(x, self.dim)
        idx = []
        for mu, coord in enumerate(x):
            hits = np.nonzero(np.abs(self.axes[mu] - coord) <= 1e-12)[0]
            if len(hits) != 1:
                raise BoundaryError(f"x={x!r} is not a lattice point of the tabulated family")
            idx.append(int(hits[0]))
        return tuple(idx)

    def raw_values(self, x) -> np.ndarray:
        return self.values[self._index_of(x)]

    def neighbor_states(self, x, mu) -> tuple[np.ndarray, np.ndarray, float]:
        """States one lattice step either side of x along axis mu."""
        idx = list(self._index_of(x))
        if idx[mu] == 0 or idx[mu] == len(self.axes[mu]) - 1:
            raise BoundaryError(f"central difference at x={x!r} leaves the lattice on axis {mu}")
        lo, hi = list(idx), list(idx)
        lo[mu] -= 1
        hi[mu] += 1
        step = 0.5 * (self.axes[mu][hi[mu]] - self.axes[mu][lo[mu]])
        return self.values[tuple(hi)], self.values[tuple(lo)], step


def evaluate(family, x) -> StateVector:
    """Unit-normalized state of the family at x.

    The raw amplitudes sqrt(P) exp(iS/hbar) must already be normalized to
    within 1e-6 against the space's weights (else the density does not match
    the measure); the residual defect is divided out so the returned state is
    exactly unit norm.
    """
    raw = family.raw_values(x)
    nrm = family.space.norm(raw)
    if abs(nrm**2 - 1.0) > EVALUATE_NORM_TOL:
        raise MeasureMismatchError(
            f"family density integrates to {nrm**2!r} against the reference weights"
        )
    return StateVector(values=raw / nrm, space=family.space, normalized=True)


def polar_decompose(psi: StateVector, anchor: int = 0, hbar: float = 1.0):
    """Split a nowhere-vanishing state into density P and unwrapped phase S.

    P = |psi|^2 and S = hbar * arg(psi), with the argument unwrapped along the
    sample ordering so successive jumps stay below pi, pinned at the anchor
    sample.  Reconstruction sqrt(P) exp(iS/hbar) reproduces psi to rounding.
    Emits :class:`UnwrapAmbiguityWarning` when an adjacent jump comes within
    0.1 rad of the branch cut.
    """
    values = psi.values
    if np.any(np.abs(values) < AMPLITUDE_FLOOR):
        raise NodalPointError("state has (near-)nodal samples; no smooth polar split")
    if not 0 <= anchor < len(values):
        raise ValueError(f"anchor {anchor} out of range")
    p = np.abs(values) ** 2
    jumps = np.angle(values[1:] / values[:-1])
    if np.any(np.abs(jumps) >= np.pi - 0.1):
        warnings.warn(
            "adjacent phase jump close to pi; unwrapped phase may be ambiguous",
            UnwrapAmbiguityWarning,
            stacklevel=2,
        )
    walk = np.concatenate(([0.0], np.cumsum(jumps)))
    theta = float(np.angle(values[anchor])) + walk - walk[anchor]
    return p, hbar * theta


def velocities(family, x, scheme: DerivativeScheme | None = None) -> VelocityField:
    """Velocity fields pi, u (and eta = pi - i u) of the family at x."""
    if scheme is None:
        scheme = (DerivativeScheme(mode="analytic")
                  if family.has_analytic_gradients
                  else getattr(family, "scheme", DerivativeScheme()))
    hbar, m = family.constants.hbar, family.constants.mass
    x = _as_point(x, family.dim)

    if scheme.mode == "analytic":
        if not family.has_analytic_gradients:
            raise ValueError("tabulated family has no analytic gradients")
        p = family.density(x)
        if np.any(p <= DENSITY_FLOOR):
            raise NodalPointError(f"density hit the nodal floor at x={x!r}")
        pi = family.phase_grad(x) / m
        u = (hbar / (2.0 * m)) * family.density_grad(x) / p[:, np.newaxis]
        return VelocityField(pi=pi, u=u, x=x)

    eta = np.empty((family.space.n, family.dim), dtype=complex)
    for mu in range(family.dim):
        eta[:, mu] = _eta_central(family, x, mu, scheme)
    return VelocityField(pi=eta.real, u=-eta.imag, x=x)


def _log_ratio_derivative(family, x, mu, step) -> np.ndarray:
    """d(ln psi)/dx_mu via the principal log of the two-sided state ratio."""
    if family.has_analytic_gradients:
        hi = family.raw_values(_shifted(x, mu, +step))
        lo = family.raw_values(_shifted(x, mu, -step))
        h = step
    else:
        hi, lo, h = family.neighbor_states(x, mu)
    if np.any(np.abs(hi) < AMPLITUDE_FLOOR) or np.any(np.abs(lo) < AMPLITUDE_FLOOR):
        raise NodalPointError("stencil state hit the amplitude floor")
    ratio = hi / lo
    return (np.log(np.abs(ratio)) + 1j * np.angle(ratio)) / (2.0 * h)


def _eta_central(family, x, mu, scheme) -> np.ndarray:
    hbar, m = family.constants.hbar, family.constants.mass
    d1 = _log_ratio_derivative(family, x, mu, scheme.step)
    if scheme.richardson and family.has_analytic_gradients:
        d2 = _log_ratio_derivative(family, x, mu, scheme.step / 2.0)
        d1 = (4.0 * d2 - d1) / 3.0
    return -1j * (hbar / m) * d1


def _shifted(x, mu, h) -> np.ndarray:
    y = np.array(x, dtype=float)
    y[mu] += h
    return y


def derivative_state(family, x, mu, scheme: DerivativeScheme | None = None) -> StateVector:
    """d(psi_x)/dx_mu as an (unnormalized) vector on the family's space.

    Satisfies d(psi) = (i m / hbar) * eta_mu * psi up to the scheme's
    truncation order.  In analytic mode the derivative is assembled from the
    closed-form density/phase gradients; the x-variation of the discrete
    normalization constant (around 1e-12 on the built-in grids) is neglected.
    """
    if scheme is None:
        scheme = (DerivativeScheme(mode="analytic")
                  if family.has_analytic_gradients
                  else getattr(family, "scheme", DerivativeScheme()))
    x = _as_point(x, family.dim)
    hbar = family.constants.hbar

    if scheme.mode == "analytic":
        raw = family.raw_values(x)
        p = family.density(x)
        dp = family.density_grad(x)[:, mu]
        ds = family.phase_grad(x)[:, mu]
        dvals = raw * (dp / (2.0 * p) + 1j * ds / hbar)
        nrm = family.space.norm(raw)
    else:
        if family.has_analytic_gradients:
            hi = family.raw_values(_shifted(x, mu, scheme.step))
            lo = family.raw_values(_shifted(x, mu, -scheme.step))
            h = scheme.step
        else:
            hi, lo, h = family.neighbor_states(x, mu)
        dvals = (hi - lo) / (2.0 * h)
        nrm = family.space.norm(family.raw_values(x))
        if scheme.richardson and family.has_analytic_gradients:
            hi2 = family.raw_values(_shifted(x, mu, scheme.step / 2.0))
            lo2 = family.raw_values(_shifted(x, mu, -scheme.step / 2.0))
            dvals = (4.0 * (hi2 - lo2) / scheme.step - dvals) / 3.0
    return StateVector(values=dvals / nrm, space=family.space)


# ---------------------------------------------------------------------------
# Built-in analytic families.  Each uses a continuum probability density
# q(phi, x) bridged to the discrete weights through the grid's trapezoid
# masses t_i: the discrete density is P_i(x) = (t_i / w_i) q(phi_i, x), so
# sum_i w_i P_i is the trapezoid estimate of the unit integral of q, and all
# x-derivatives of ln P coincide with those of ln q.
# ---------------------------------------------------------------------------

def _trapezoid_masses(phi: np.ndarray) -> np.ndarray:
    t = np.empty_like(phi)
    t[1:-1] = 0.5 * (phi[2:] - phi[:-2])
    t[0] = 0.5 * (phi[1] - phi[0])
    t[-1] = 0.5 * (phi[-1] - phi[-2])
    return t


def _gauss_pdf(phi, center, sigma):
    return np.exp(-0.5 * ((phi - center) / sigma) ** 2) / (sigma * np.sqrt(2.0 * np.pi))


def _default_space(sigma, n, reference="gaussian"):
    span = 8.0 * sigma + 2.5
    return grid_space(-span, span, n, reference=reference,
                      scale=None if reference == "uniform" else 0.5 * span)


def gaussian_shift_family(sigma: float = 1.0, *, space=None,
                          constants: PhysicalConstants = DEFAULT_CONSTANTS,
                          n: int = 129) -> AnalyticStateFamily:
    """Real Gaussian packet whose center is the estimated parameter (d = 1)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    space = space or _default_space(sigma, n)
    phi = space.coords
    ratio = _trapezoid_masses(phi) / space.weights
    zeros = np.zeros_like(phi)

    def density(x):
        return ratio * _gauss_pdf(phi, x[0], sigma)

    def density_grad(x):
        return (density(x) * (phi - x[0]) / sigma**2)[:, np.newaxis]

    return AnalyticStateFamily(
        space, constants, 1,
        density=density,
        phase=lambda x: zeros,
        density_grad=density_grad,
        phase_grad=lambda x: zeros[:, np.newaxis],
        name="gaussian-shift", params={"sigma": sigma},
    )


def linear_phase_family(k: float = 1.0, *, width: float = 1.0, space=None,
                        constants: PhysicalConstants = DEFAULT_CONSTANTS,
                        n: int = 129) -> AnalyticStateFamily:
    """Static Gaussian density with phase S = hbar * k * phi * x (d = 1)."""
    space = space or _default_space(width, n)
    phi = space.coords
    ratio = _trapezoid_masses(phi) / space.weights
    dens = ratio * _gauss_pdf(phi, 0.0, width)
    hbar = constants.hbar

    return AnalyticStateFamily(
        space, constants, 1,
        density=lambda x: dens,
        phase=lambda x: hbar * k * phi * x[0],
        density_grad=lambda x: np.zeros((space.n, 1)),
        phase_grad=lambda x: (hbar * k * phi)[:, np.newaxis],
        name="linear-phase", params={"k": k, "width": width},
    )


def mixed_family(sigma: float = 1.0, k: float = 1.0, *, space=None,
                 constants: PhysicalConstants = DEFAULT_CONSTANTS,
                 n: int = 129) -> AnalyticStateFamily:
    """Shifted Gaussian density and linear phase on the same axis (d = 1).

    Both velocity covariances are nonzero, so the Fisher metric mixes the
    transport and osmotic contributions.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    space = space or _default_space(sigma, n)
    phi = space.coords
    ratio = _trapezoid_masses(phi) / space.weights
    hbar = constants.hbar

    def density(x):
        return ratio * _gauss_pdf(phi, x[0], sigma)

    def density_grad(x):
        return (density(x) * (phi - x[0]) / sigma**2)[:, np.newaxis]

    return AnalyticStateFamily(
        space, constants, 1,
        density=density,
        phase=lambda x: hbar * k * phi * x[0],
        density_grad=density_grad,
        phase_grad=lambda x: (hbar * k * phi)[:, np.newaxis],
        name="mixed", params={"sigma": sigma, "k": k},
    )


def vortex_family(winding: int = 1, epsilon: float = 0.0, *, width: float = 1.0,
                  space=None, constants: PhysicalConstants = DEFAULT_CONSTANTS,
                  n: int = 65) -> AnalyticStateFamily:
    """Static density with phase winding around the origin of a 2-d parameter plane.

    S(phi, x) = hbar * winding * atan2(x2, x1) + epsilon * phi * |x|.  The
    phase factor is single-valued for integer winding; the velocity field is
    singular at x = 0, which loops must avoid.
    """
    if winding != int(winding):
        raise ValueError("winding must be an integer")
    space = space or _default_space(width, n)
    phi = space.coords
    ratio = _trapezoid_masses(phi) / space.weights
    dens = ratio * _gauss_pdf(phi, 0.0, width)
    hbar = constants.hbar
    nw = float(winding)

    def _checked_radius(x):
        r2 = float(x[0] ** 2 + x[1] ** 2)
        if r2 < 1e-24:
            raise ValueError("vortex family is singular at x = 0")
        return r2

    def phase(x):
        r2 = _checked_radius(x)
        return hbar * nw * np.arctan2(x[1], x[0]) + epsilon * phi * np.sqrt(r2)

    def phase_grad(x):
        r2 = _checked_radius(x)
        r = np.sqrt(r2)
        g = np.empty((space.n, 2))
        g[:, 0] = hbar * nw * (-x[1] / r2) + epsilon * phi * (x[0] / r)
        g[:, 1] = hbar * nw * (x[0] / r2) + epsilon * phi * (x[1] / r)
        return g

    return AnalyticStateFamily(
        space, constants, 2,
        density=lambda x: dens,
        phase=phase,
        density_grad=lambda x: np.zeros((space.n, 2)),
        phase_grad=phase_grad,
        name="vortex", params={"n": winding, "epsilon": epsilon, "width": width},
    )


def with_phase_offset(family: AnalyticStateFamily, c: float) -> AnalyticStateFamily:
    """Shift the phase by hbar * c * sum(x): pi gains a flat constant, u is untouched."""
    hbar = family.constants.hbar

    def phase(x):
        return family.phase(x) + hbar * c * float(np.sum(x))

    def phase_grad(x):
        return family.phase_grad(x) + hbar * c

    return AnalyticStateFamily(
        family.space, family.constants, family.dim,
        density=family._density, phase=phase,
        density_grad=family._density_grad, phase_grad=phase_grad,
        name=family.name + "+offset", params={**family.params, "offset": c},
    )


BUILTIN_FAMILIES = {
    "gaussian-shift": gaussian_shift_family,
    "linear-phase": linear_phase_family,
    "mixed": mixed_family,
    "vortex": vortex_family,
}


def family_from_spec(spec: dict):
    """Build a family from a parsed spec mapping (see the README for the schema)."""
    spec = dict(spec)
    kind = spec.pop("family", None)
    if kind is None:
        raise ValueError("family spec needs a 'family' key")
    constants = PhysicalConstants(**spec.pop("constants", {}))
    space = spec.pop("space", None)
    if isinstance(space, dict):
        if "points" in space:
            space = ConfigurationSpace(points=np.asarray(space["points"]),
                                       weights=np.asarray(space["weights"]))
        else:
            space = grid_space(space["lo"], space["hi"], space["n"],
                               reference=space.get("reference", "uniform"),
                               scale=space.get("scale"))
    if kind == "tabulated":
        return tabulated_from_csv(spec["csv"], space=space, constants=constants,
                                  scheme=DerivativeScheme(**spec.get("scheme", {})))
    if kind not in BUILTIN_FAMILIES:
        raise ValueError(f"unknown family {kind!r}")
    if kind == "vortex" and "n" in spec:
        spec["winding"] = int(spec.pop("n"))
    spec.pop("grid", None)
    return BUILTIN_FAMILIES[kind](space=space, constants=constants, **spec)


def tabulated_from_csv(path, *, space, constants=DEFAULT_CONSTANTS,
                       scheme=None) -> TabulatedStateFamily:
    """Load a tabulated family from CSV rows (x_1..x_d, phi_index, Re, Im)."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            rows.append([float(v) for v in row])
    if not rows:
        raise ValueError(f"no data rows in {path}")
    width = len(rows[0])
    d = width - 3
    if d < 1:
        raise ValueError("tabulated CSV needs at least 4 columns")
    data = np.asarray(rows)
    axes = [np.unique(data[:, mu]) for mu in range(d)]
    shape = tuple(len(a) for a in axes) + (space.n,)
    values = np.full(shape, np.nan, dtype=complex)
    for row in data:
        idx = tuple(int(np.searchsorted(axes[mu], row[mu])) for mu in range(d))
        k = int(row[d])
        values[idx + (k,)] = row[d + 1] + 1j * row[d + 2]
    if np.any(np.isnan(values)):
        raise ValueError(f"tabulated CSV {path} does not fill the full lattice")
    return TabulatedStateFamily(space, constants, axes, values, scheme=scheme)
