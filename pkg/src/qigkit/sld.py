"""Symmetric logarithmic derivative operators for pure-state families.

The SLD at (x, mu) is built two ways: from derivative states (canonical rank-2
form) and from the complex velocity eta as multiplication-plus-projector
algebra.  Both are self-adjoint for the weighted inner product and have zero
expectation in the base state; they agree exactly, which is one of the main
identities this toolkit verifies.  The construction forgets a flat imaginary
shift of eta, and `invert_sld` recovers eta from the operator modulo that
freedom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NodalPointError, NotAnSldError
from .families import PhysicalConstants, VelocityField, derivative_state, evaluate
from .space import (
    LinearOperator,
    StateVector,
    identity,
    inner_product,
    projector,
    weighted_outer,
)

SLD_CONSTRUCTION_TOL = 1e-10
NOT_AN_SLD_TOL = 1e-6
AMPLITUDE_FLOOR = 1e-150


@dataclass(frozen=True, eq=False)
class SldOperator:
    """Self-adjoint zero-expectation operator attached to one parameter axis."""

    op: LinearOperator
    x: np.ndarray
    axis: int
    provenance: str

    def apply(self, psi) -> StateVector:
        return self.op.apply(psi)

    def export_dict(self) -> dict:
        """JSON-ready dump: base point, axis, size, entries as [Re, Im] row-major."""
        e = self.op.entries
        return {
            "x": np.atleast_1d(self.x).tolist(),
            "axis": self.axis,
            "n": self.op.space.n,
            "entries": [[float(z.real), float(z.imag)] for z in e.ravel()],
        }


@dataclass(frozen=True, eq=False)
class GaugeShift:
    """Flat imaginary shift eta_mu -> eta_mu + i c_mu, one real c per axis."""

    c: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if not np.all(np.isfinite(c)):
            raise ValueError("gauge shift entries must be finite reals")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True, eq=False)
class EtaClass:
    """Complex velocity along one axis, defined up to a flat complex constant.

    The canonical representative fixes that constant to zero; its real part
    shifts pi, its imaginary part is the gauge freedom of the SLD map.
    """

    eta: np.ndarray
    axis: int
    x: np.ndarray

    @property
    def pi(self) -> np.ndarray:
        return self.eta.real

    @property
    def u(self) -> np.ndarray:
        return -self.eta.imag

    def offset_from(self, other_eta: np.ndarray) -> complex:
        return complex(np.mean(self.eta - np.asarray(other_eta)))

    def matches(self, other_eta: np.ndarray, tol: float = 1e-8) -> bool:
        """True when the two representatives differ by a flat complex constant."""
        diff = self.eta - np.asarray(other_eta)
        return bool(np.max(np.abs(diff - diff.mean())) <= tol)


def _checked(op: LinearOperator, psi: StateVector, x, axis, provenance) -> SldOperator:
    sa = op.selfadjoint_defect()
    ev = abs(op.expectation(psi))
    if sa > SLD_CONSTRUCTION_TOL or ev > SLD_CONSTRUCTION_TOL:
        raise NotAnSldError(
            f"constructed operator violates SLD contracts "
            f"(self-adjoint defect {sa:.3e}, expectation {ev:.3e})"
        )
    return SldOperator(op=op, x=np.atleast_1d(np.asarray(x, dtype=float)),
                       axis=axis, provenance=provenance)


def sld_canonical(family, x, mu: int) -> SldOperator:
    """SLD from derivative states: 2|dpsi><psi| + 2|psi><dpsi| minus its trace part."""
    psi = evaluate(family, x)
    dpsi = derivative_state(family, x, mu)
    op = 2.0 * weighted_outer(dpsi, psi) + 2.0 * weighted_outer(psi, dpsi)
    scalar = 2.0 * (inner_product(dpsi, psi) + inner_product(psi, dpsi))
    op = op - scalar * identity(family.space)
    return _checked(op, psi, x, mu, "canonical")


def sld_eta(vel: VelocityField, psi: StateVector,
            constants: PhysicalConstants, mu: int) -> SldOperator:
    """SLD from the complex velocity: (2im/hbar)(eta P - P eta~) plus its scalar part.

    The multiplication operators enter as row/column scalings of the
    projector, keeping construction at O(N^2).
    """
    eta = vel.eta[:, mu]
    coeff = 2j * constants.mass / constants.hbar
    p_entries = projector(psi).entries
    mean_eta = complex(np.sum(psi.space.weights * np.abs(psi.values) ** 2 * eta))
    entries = coeff * (eta[:, np.newaxis] * p_entries - p_entries * np.conj(eta)[np.newaxis, :])
    entries[np.diag_indices_from(entries)] += coeff * (np.conj(mean_eta) - mean_eta)
    op = LinearOperator(entries=entries, space=psi.space)
    return _checked(op, psi, vel.x, mu, "eta-form")


def sld_residual(sld: SldOperator, family, x, mu: int) -> float:
    """Defect of the defining equation: || d(rho) - (L rho + rho L)/2 ||."""
    psi = evaluate(family, x)
    dpsi = derivative_state(family, x, mu)
    rho = projector(psi)
    drho = weighted_outer(dpsi, psi) + weighted_outer(psi, dpsi)
    sym = 0.5 * (sld.op @ rho + rho @ sld.op)
    return (drho - sym).one_norm()


def gauge_shift_sld(vel: VelocityField, shift: GaugeShift, psi: StateVector,
                    constants: PhysicalConstants, mu: int):
    """SLD of the shifted velocity eta + i c, and its difference from the unshifted one.

    The difference is (4 m / hbar) c (I - P): it annihilates the base state,
    so both operators act identically on it.
    """
    base = sld_eta(vel, psi, constants, mu)
    if shift.c.size == vel.dim:
        c = float(shift.c[mu])
    elif shift.c.size == 1:
        c = float(shift.c[0])
    else:
        raise ValueError(f"gauge shift has {shift.c.size} entries for {vel.dim} axes")
    u_shift = np.zeros_like(vel.u)
    u_shift[:, mu] = c
    shifted_field = VelocityField(pi=vel.pi, u=vel.u - u_shift, x=vel.x)  # eta + ic on axis mu
    shifted = sld_eta(shifted_field, psi, constants, mu)
    return shifted, shifted.op - base.op


def invert_sld(sld: SldOperator, psi: StateVector,
               constants: PhysicalConstants) -> EtaClass:
    """Recover the velocity class from an SLD via eta = -(i hbar / 2m) (L psi) / psi.

    The flat complex constant the operator cannot see is fixed to zero; the
    round trip through `sld_eta` therefore returns the original eta minus its
    state expectation.
    """
    if np.any(np.abs(psi.values) < AMPLITUDE_FLOOR):
        raise NodalPointError("state has (near-)nodal samples; cannot divide by psi")
    expect = abs(sld.op.expectation(psi))
    if expect > NOT_AN_SLD_TOL:
        raise NotAnSldError(f"operator expectation {expect:.3e} is too far from zero")
    lpsi = sld.op.apply(psi).values
    eta = -0.5j * (constants.hbar / constants.mass) * lpsi / psi.values
    return EtaClass(eta=eta, axis=sld.axis, x=sld.x)
