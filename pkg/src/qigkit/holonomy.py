"""Loop phases of the complex velocity: flatness, winding, and quantization.

The complex velocity is a log-gradient, so its curl vanishes and its loop
integral picks up only the topology of the phase: (m/hbar) times the integral
around a closed parameter loop equals 2 pi n plus a residual offset.  This
module measures the discrete curl on small plaquettes, integrates velocity
fields around polygonal or analytically parameterized loops, decomposes the
resulting phase, and cross-checks it against direct phase accumulation of the
states along the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonSingleValuedDensityError, RefinementNeededError
from .families import evaluate, velocities

IM_PART_TOL = 1e-6
UNWRAP_GUARD = np.pi - 0.1


@dataclass(frozen=True, eq=False)
class Loop:
    """Closed parameter-space path, optionally with an analytic parameterization.

    ``vertices`` has shape (K+1, d) with the last vertex equal to the first.
    When ``tangents``/``dt`` are set (e.g. for generated circles) the loop
    integral runs as a trapezoid in the loop parameter with those exact
    velocities; plain vertex loops fall back to chord increments.
    """

    vertices: np.ndarray
    tangents: np.ndarray | None = None
    dt: np.ndarray | None = None

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "vertices", v)
        if len(v) < 2 or not np.array_equal(v[0], v[-1]):
            raise ValueError("loop must be closed: last vertex must equal the first")
        if np.any(np.all(v[1:] == v[:-1], axis=1)):
            raise ValueError("consecutive loop vertices must be distinct")
        if (self.tangents is None) != (self.dt is None):
            raise ValueError("tangents and dt must be given together")
        if self.tangents is not None:
            t = np.asarray(self.tangents, dtype=float)
            dt = np.asarray(self.dt, dtype=float)
            if t.shape != v.shape or dt.shape != (len(v) - 1,):
                raise ValueError("tangent/dt shapes do not match the vertices")
            object.__setattr__(self, "tangents", t)
            object.__setattr__(self, "dt", dt)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def edges(self) -> int:
        return len(self.vertices) - 1


def circle_loop(center, radius: float, segments: int, turns: int = 1) -> Loop:
    """Circle of given winding, carrying its exact tangents."""
    if segments < 3:
        raise ValueError("need at least three segments")
    if radius <= 0:
        raise ValueError("radius must be positive")
    center = np.asarray(center, dtype=float)
    t = 2.0 * np.pi * turns * np.arange(segments + 1) / segments
    v = center + radius * np.stack([np.cos(t), np.sin(t)], axis=1)
    tan = radius * np.stack([-np.sin(t), np.cos(t)], axis=1)
    v[-1] = v[0]
    tan[-1] = tan[0]
    dt = np.full(segments, 2.0 * np.pi * turns / segments)
    return Loop(vertices=v, tangents=tan, dt=dt)


def square_loop(center, half_side: float, segments_per_side: int) -> Loop:
    """Axis-aligned square traversed counterclockwise, as a plain polygon."""
    cx, cy = np.asarray(center, dtype=float)
    s = float(half_side)
    corners = np.array([[cx - s, cy - s], [cx + s, cy - s],
                        [cx + s, cy + s], [cx - s, cy + s], [cx - s, cy - s]])
    verts = []
    for a, b in zip(corners[:-1], corners[1:]):
        frac = np.arange(segments_per_side)[:, np.newaxis] / segments_per_side
        verts.append(a + frac * (b - a))
    verts.append(corners[-1:])
    return Loop(vertices=np.vstack(verts))


def reverse_loop(loop: Loop) -> Loop:
    tangents = None if loop.tangents is None else -loop.tangents[::-1]
    dt = None if loop.dt is None else loop.dt[::-1]
    return Loop(vertices=loop.vertices[::-1], tangents=tangents, dt=dt)


def loop_from_spec(spec: dict) -> Loop:
    """Loop from a parsed mapping: {"vertices": [...]} or {"circle": {...}}."""
    if "vertices" in spec:
        return Loop(vertices=np.asarray(spec["vertices"], dtype=float))
    if "circle" in spec:
        c = spec["circle"]
        return circle_loop(c.get("center", (0.0, 0.0)), c["radius"],
                           int(c["segments"]), int(c.get("turns", 1)))
    raise ValueError("loop spec needs 'vertices' or 'circle'")


@dataclass(frozen=True)
class CurvatureProbe:
    """Central-difference plaquette for one pair of parameter axes."""

    x: tuple
    axes: tuple = (0, 1)
    step: float = 1e-3

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("probe step must be positive")
        if self.axes[0] == self.axes[1]:
            raise ValueError("probe needs two distinct axes")


def curvature_of_field(eta_fn, probe: CurvatureProbe) -> complex:
    """Discrete curl d_mu eta_nu - d_nu eta_mu; the sample with largest modulus.

    ``eta_fn`` maps a parameter point to per-sample complex velocities of
    shape (N, d) (or just (d,) for sample-independent fields).
    """
    mu, nu = probe.axes
    x = np.asarray(probe.x, dtype=float)
    h = probe.step

    def shifted(axis, sign):
        y = x.copy()
        y[axis] += sign * h
        return np.atleast_2d(np.asarray(eta_fn(y), dtype=complex))

    d_mu_eta = (shifted(mu, +1) - shifted(mu, -1)) / (2.0 * h)
    d_nu_eta = (shifted(nu, +1) - shifted(nu, -1)) / (2.0 * h)
    f = d_mu_eta[:, nu] - d_nu_eta[:, mu]
    return complex(f[int(np.argmax(np.abs(f)))])


def curvature(family, probe: CurvatureProbe) -> complex:
    """Discrete curl of the family's velocity field at the probe."""
    return curvature_of_field(lambda y: velocities(family, y).eta, probe)


def _loop_etas(family, loop: Loop) -> np.ndarray:
    etas = np.empty((len(loop.vertices), family.space.n, loop.dim), dtype=complex)
    for k, x in enumerate(loop.vertices):
        etas[k] = velocities(family, x).eta
    return etas


def _sample_weights(family, x0) -> np.ndarray:
    q = family.space.weights * family.density(x0)
    return q / q.sum()


def loop_integral_per_sample(family, loop: Loop) -> np.ndarray:
    """(m/hbar) * loop integral of eta for every sample, trapezoid per edge."""
    etas = _loop_etas(family, loop)
    if loop.tangents is None:
        f = np.einsum("knd,kd->kn", 0.5 * (etas[:-1] + etas[1:]),
                      np.diff(loop.vertices, axis=0))
        total = f.sum(axis=0)
    else:
        f = np.einsum("knd,kd->kn", etas, loop.tangents)
        total = (0.5 * (f[:-1] + f[1:]) * loop.dt[:, np.newaxis]).sum(axis=0)
    m, hbar = family.constants.mass, family.constants.hbar
    return (m / hbar) * total


@dataclass(frozen=True)
class PhaseAggregate:
    """Loop phase pooled over samples, with its spread and imaginary defect."""

    phase: float
    spread: float
    im_defect: float


def holonomy_integral(family, loop: Loop, im_tol: float = IM_PART_TOL) -> PhaseAggregate:
    """Aggregate loop phase of the velocity field.

    The per-sample complex integrals are averaged with the density-weighted
    measure at the loop's start vertex; their real parts give the phase and
    the spread diagnostic, while the imaginary parts must vanish (the density
    is single-valued, so its log closes around any loop).
    """
    per_sample = loop_integral_per_sample(family, loop)
    im_defect = float(np.max(np.abs(per_sample.imag)))
    if im_defect > im_tol:
        raise NonSingleValuedDensityError(
            f"loop integral has imaginary part {im_defect:.3e}; density does not "
            "close around the loop (assumption violated or loop too coarse)"
        )
    q = _sample_weights(family, loop.vertices[0])
    phase = float(q @ per_sample.real)
    spread = float(np.max(np.abs(per_sample.real - phase)))
    return PhaseAggregate(phase=phase, spread=spread, im_defect=im_defect)


def phase_accumulate(family, loop: Loop) -> float:
    """Aggregate phase from the state's argument walked edge by edge.

    Independent of the velocity field: uses only ratios of state values at
    consecutive vertices.  Raises when any single-edge jump approaches the
    branch cut, since the walk can then no longer be trusted.
    """
    states = np.stack([family.raw_values(x) for x in loop.vertices])
    steps = np.angle(states[1:] / states[:-1])
    if np.max(np.abs(steps)) >= UNWRAP_GUARD:
        raise RefinementNeededError(
            "an edge advances the phase by nearly pi; refine the loop"
        )
    per_sample = steps.sum(axis=0)
    q = _sample_weights(family, loop.vertices[0])
    return float(q @ per_sample)


def winding_decompose(phase: float):
    """Split a phase into 2 pi n plus an offset in (-pi, pi]."""
    if not math.isfinite(phase):
        raise ValueError("phase must be finite")
    n = int(math.ceil(phase / (2.0 * math.pi) - 0.5))
    offset = phase - 2.0 * math.pi * n
    return n, offset


@dataclass(frozen=True)
class HolonomyReport:
    """Loop phase, its integer/offset decomposition, and the cross-checks."""

    phase: float
    winding: int
    offset: float
    oracle_phase: float
    curvature_residual: float
    phi_spread: float
    im_defect: float

    def as_dict(self) -> dict:
        return {
            "phase": self.phase,
            "winding": self.winding,
            "offset": self.offset,
            "oracle_phase": self.oracle_phase,
            "curvature_residual": self.curvature_residual,
            "phi_spread": self.phi_spread,
            "im_defect": self.im_defect,
        }


def compute_holonomy(family, loop: Loop, im_tol: float = IM_PART_TOL,
                     curvature_step: float = 1e-3) -> HolonomyReport:
    """Full holonomy record for a family around a loop.

    The flatness residual is probed at the loop's first vertex (zero for
    single-axis parameter spaces, where no plaquette exists).
    """
    agg = holonomy_integral(family, loop, im_tol=im_tol)
    oracle = phase_accumulate(family, loop)
    n, offset = winding_decompose(agg.phase)
    if family.dim >= 2:
        probe = CurvatureProbe(x=tuple(loop.vertices[0]), axes=(0, 1), step=curvature_step)
        residual = abs(curvature(family, probe))
    else:
        residual = 0.0
    return HolonomyReport(phase=agg.phase, winding=n, offset=offset,
                          oracle_phase=oracle, curvature_residual=float(residual),
                          phi_spread=agg.spread, im_defect=agg.im_defect)
