"""Change of the reference weights and the invariance of everything built on them.

Retargeting the weights w -> w' = w e^W / Z is intertwined by the unitary
multiplication map (J f) = f e^{-W/2} sqrt(Z).  States, SLD operators, and
Fisher metrics built against either weighting agree through J; this module
constructs the transported objects and measures the four defects (unitarity,
state match, operator intertwining, metric equality).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WiringError
from .families import AnalyticStateFamily, evaluate, velocities
from .fisher import qfi_anticommutator
from .sld import sld_eta
from .space import ConfigurationSpace, LinearOperator, StateVector, inner_product

W_RANGE_LIMIT = 700.0


@dataclass(frozen=True, eq=False)
class MeasureChange:
    """Log-density W of the new weights against the old: dw' proportional to e^W dw."""

    w_log: np.ndarray
    space: ConfigurationSpace

    def __post_init__(self):
        w_log = np.asarray(self.w_log, dtype=float)
        object.__setattr__(self, "w_log", w_log)
        if w_log.shape != (self.space.n,):
            raise ValueError("log-density length does not match the space")
        if not np.all(np.isfinite(w_log)) or np.max(np.abs(w_log)) > W_RANGE_LIMIT:
            raise ValueError("log-density entries must be finite with |W| <= 700")

    @property
    def z(self) -> float:
        """Normalization sum(w_i e^{W_i}) keeping the new weights a probability."""
        return float(np.sum(self.space.weights * np.exp(self.w_log)))

    @property
    def j_diagonal(self) -> np.ndarray:
        """Diagonal of the unitary J: e^{-W/2} sqrt(Z)."""
        return np.exp(-0.5 * self.w_log) * np.sqrt(self.z)


def change_measure(space: ConfigurationSpace, change: MeasureChange) -> ConfigurationSpace:
    """New space with weights w e^W / Z on the same points."""
    if space is not change.space:
        _check_space(space, change)
    w = space.weights * np.exp(change.w_log)
    return ConfigurationSpace(points=space.points, weights=w / w.sum())


def _check_space(space, change):
    if space.n != change.space.n or not np.array_equal(space.points, change.space.points) \
            or not np.array_equal(space.weights, change.space.weights):
        raise WiringError("measure change was built for a different space")


def j_map(f: StateVector, change: MeasureChange,
          target: ConfigurationSpace | None = None) -> StateVector:
    """Unitary transport of a state to the re-weighted space."""
    _check_space(f.space, change)
    target = target or change_measure(f.space, change)
    return StateVector(values=f.values * change.j_diagonal, space=target,
                       normalized=f.normalized)


def conjugate_by_j(op: LinearOperator, change: MeasureChange,
                   target: ConfigurationSpace) -> LinearOperator:
    """J op J^+ as an operator on the re-weighted space.

    Implemented with the ratio j_i / j_j, so diagonal entries are preserved
    exactly (x / x == 1 in floating point) and multiplication operators
    commute with J identically.
    """
    j = change.j_diagonal
    entries = op.entries * np.divide.outer(j, j)
    return LinearOperator(entries=entries, space=target)


def with_changed_measure(family: AnalyticStateFamily, change: MeasureChange,
                         adjust_density: bool = True) -> AnalyticStateFamily:
    """The same physical family expressed against the re-weighted space.

    With ``adjust_density`` the density transforms by the reciprocal measure
    factor, P' = P e^{-W} Z, which is the law that keeps the physics fixed.
    ``adjust_density=False`` deliberately skips it (renormalizing per x so the
    result is still a valid family) and serves as the wrong-law control.
    """
    _check_space(family.space, change)
    primed_space = change_measure(family.space, change)
    z = change.z

    if adjust_density:
        factor = np.exp(-change.w_log) * z

        def density(x):
            return family.density(x) * factor

        def density_grad(x):
            return family.density_grad(x) * factor[:, np.newaxis]
    else:
        w_primed = primed_space.weights

        def density(x):
            p = family.density(x)
            return p / float(w_primed @ p)

        def density_grad(x):
            p = family.density(x)
            dp = family.density_grad(x)
            total = float(w_primed @ p)
            dtotal = w_primed @ dp
            return dp / total - np.outer(p, dtotal) / total**2

    return AnalyticStateFamily(
        primed_space, family.constants, family.dim,
        density=density, phase=family._phase,
        density_grad=density_grad, phase_grad=family._phase_grad,
        name=family.name + ("'" if adjust_density else "'wrong"),
        params=family.params,
    )


@dataclass(frozen=True)
class MeasureIndependenceReport:
    """Worst-case defects of the four transport identities over an x grid."""

    unitarity_defect: float
    state_match_defect: float
    intertwining_defect: float
    metric_defect: float
    per_x: tuple

    def as_dict(self) -> dict:
        return {
            "unitarity_defect": self.unitarity_defect,
            "state_match_defect": self.state_match_defect,
            "intertwining_defect": self.intertwining_defect,
            "metric_defect": self.metric_defect,
            "per_x": list(self.per_x),
        }


def verify_measure_independence(family: AnalyticStateFamily, xs, change: MeasureChange,
                                adjust_density: bool = True, probe_seed: int = 0,
                                probes: int = 10) -> MeasureIndependenceReport:
    """Measure all four invariance defects for the family over the given points."""
    primed = with_changed_measure(family, change, adjust_density=adjust_density)
    primed_space = primed.space

    rng = np.random.default_rng(probe_seed)
    unitarity = 0.0
    for _ in range(probes):
        f = _random_state(rng, family.space)
        g = _random_state(rng, family.space)
        lhs = inner_product(j_map(f, change, primed_space), j_map(g, change, primed_space))
        unitarity = max(unitarity, abs(lhs - inner_product(f, g)))

    rows = []
    for x in np.atleast_2d(np.asarray(xs, dtype=float)):
        psi = evaluate(family, x)
        psi_primed = evaluate(primed, x)
        transported = j_map(psi, change, primed_space)
        state_defect = primed_space.norm(transported.values - psi_primed.values)

        vel = velocities(family, x)
        vel_primed = velocities(primed, x)
        intertwine = 0.0
        for mu in range(family.dim):
            lhs = sld_eta(vel_primed, psi_primed, family.constants, mu).op
            rhs = conjugate_by_j(sld_eta(vel, psi, family.constants, mu).op,
                                 change, primed_space)
            intertwine = max(intertwine, (lhs - rhs).one_norm())

        g0 = qfi_anticommutator(family, x).g
        g1 = qfi_anticommutator(primed, x).g
        metric = float(np.max(np.abs(g1 - g0)))
        rows.append({
            "x": np.atleast_1d(x).tolist(),
            "state_match": float(state_defect),
            "intertwining": float(intertwine),
            "metric": metric,
        })

    return MeasureIndependenceReport(
        unitarity_defect=float(unitarity),
        state_match_defect=max(r["state_match"] for r in rows),
        intertwining_defect=max(r["intertwining"] for r in rows),
        metric_defect=max(r["metric"] for r in rows),
        per_x=tuple(rows),
    )


def _random_state(rng, space) -> StateVector:
    vals = rng.standard_normal(space.n) + 1j * rng.standard_normal(space.n)
    return StateVector(values=vals / space.norm(vals), space=space)


def random_smooth_log_density(space: ConfigurationSpace, seed: int,
                              bound: float = 1.0) -> MeasureChange:
    """Random low-order trigonometric W with sup norm at most ``bound``."""
    rng = np.random.default_rng(seed)
    phi = space.coords
    half = 0.5 * (phi.max() - phi.min()) or 1.0
    s = np.pi * (phi - 0.5 * (phi.max() + phi.min())) / half
    w = np.zeros_like(phi)
    for j in range(1, 4):
        w += rng.standard_normal() * np.cos(j * s) + rng.standard_normal() * np.sin(j * s)
    w *= bound * rng.uniform(0.5, 1.0) / np.max(np.abs(w))
    return MeasureChange(w_log=w, space=space)
