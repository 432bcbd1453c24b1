"""Quantum Fisher metric of a state family, computed three independent ways.

* anticommutator of SLD operators in the base state,
* weighted covariances of the transport and osmotic velocities,
* overlaps of derivative states (the pure-state projective metric, times 4).

All three must agree to rounding on analytic families; the cross-check is the
point of keeping the code paths separate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .families import PhysicalConstants, VelocityField, derivative_state, evaluate, velocities
from .sld import sld_eta
from .space import StateVector, inner_product

SYMMETRY_TOL = 1e-10
PSD_TOL = -1e-9


@dataclass(frozen=True, eq=False)
class FisherMetric:
    """Symmetric positive-semidefinite d x d information matrix at one x."""

    g: np.ndarray
    x: np.ndarray
    method: str

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("metric must be a square matrix")
        eigmin = float(np.linalg.eigvalsh(0.5 * (g + g.T)).min())
        if eigmin < PSD_TOL:
            raise ValueError(f"metric has negative eigenvalue {eigmin:.3e}")


def _finish(raw: np.ndarray, x, method: str) -> FisherMetric:
    raw = np.asarray(raw)
    if np.iscomplexobj(raw):
        if np.max(np.abs(raw.imag), initial=0.0) > SYMMETRY_TOL:
            raise ValueError(f"{method} metric has a non-real entry")
        raw = raw.real
    asym = float(np.max(np.abs(raw - raw.T), initial=0.0))
    if asym > SYMMETRY_TOL:
        raise ValueError(f"{method} metric asymmetric by {asym:.3e}")
    return FisherMetric(g=0.5 * (raw + raw.T), x=x, method=method)


def qfi_anticommutator(family, x) -> FisherMetric:
    """g_{mu nu} = <psi| {L_mu, L_nu} |psi> / 2 with velocity-form SLD operators."""
    psi = evaluate(family, x)
    vel = velocities(family, x)
    ops = [sld_eta(vel, psi, family.constants, mu) for mu in range(family.dim)]
    applied = [op.apply(psi) for op in ops]
    d = family.dim
    g = np.empty((d, d), dtype=complex)
    for mu in range(d):
        for nu in range(d):
            first = inner_product(psi, ops[mu].apply(applied[nu]))
            second = inner_product(psi, ops[nu].apply(applied[mu]))
            g[mu, nu] = 0.5 * (first + second)
    return _finish(g, x, "anticommutator")


def qfi_covariance(vel: VelocityField, psi: StateVector,
                   constants: PhysicalConstants) -> FisherMetric:
    """g = (4 m^2 / hbar^2) [Cov(pi, pi) + Cov(u, u)] under the state's density."""
    p = psi.space.weights * np.abs(psi.values) ** 2
    p = p / p.sum()

    def cov(a):
        mean = p @ a
        centered = a - mean
        return (centered * p[:, np.newaxis]).T @ centered

    prefactor = 4.0 * constants.mass**2 / constants.hbar**2
    return _finish(prefactor * (cov(vel.pi) + cov(vel.u)), vel.x, "covariance")


def qfi_overlap(family, x) -> FisherMetric:
    """g = 4 Re(<d_mu psi|d_nu psi> - <d_mu psi|psi><psi|d_nu psi>)."""
    psi = evaluate(family, x)
    dstates = [derivative_state(family, x, mu) for mu in range(family.dim)]
    d = family.dim
    g = np.empty((d, d), dtype=complex)
    for mu in range(d):
        for nu in range(d):
            g[mu, nu] = 4.0 * (
                inner_product(dstates[mu], dstates[nu])
                - inner_product(dstates[mu], psi) * inner_product(psi, dstates[nu])
            )
    return _finish(g.real, x, "overlap")
