"""Monte-Carlo phase averaging over a random coupling amplitude.

A toy action S = S0 + h * g with a zero-mean Gaussian amplitude h models
averaging a matter phase over background fluctuations.  The sample average of
exp(i S / hbar) damps to an emergent density (the Gaussian characteristic
function in closed form), from which osmotic and transport velocities are
extracted by log-differentiation in the parameter.

The per-sample sum is the one hot loop in this package.  It runs through a
compiled kernel when the extension built, with a numpy fallback selected at
import; both reduce over the same fan-in-2 tree, so a given (seed, workers)
pair reproduces bitwise on either backend up to the cos/sin libm calls.
Set QIGKIT_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryError, NodalPointError
from .families import DEFAULT_CONSTANTS, DerivativeScheme, PhysicalConstants, VelocityField
from .space import ConfigurationSpace

if os.environ.get("QIGKIT_PURE_PYTHON"):
    from . import _phase_kernel_py as _kernel
else:
    try:
        from . import _phase_kernel as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _phase_kernel_py as _kernel

KERNEL_BACKEND = _kernel.BACKEND
NODAL_FLOOR = 1e-12
MODULUS_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class FluctuationEnsemble:
    """Zero-mean Gaussian draws of the fluctuation amplitude, with its seed."""

    samples: np.ndarray
    sigma_h: float
    seed: int

    @property
    def count(self) -> int:
        return len(self.samples)


def gaussian_ensemble(sigma_h: float, count: int, seed: int) -> FluctuationEnsemble:
    if sigma_h < 0:
        raise ValueError("sigma_h must be nonnegative")
    if count < 1:
        raise ValueError("ensemble needs at least one sample")
    rng = np.random.default_rng(seed)
    return FluctuationEnsemble(samples=sigma_h * rng.standard_normal(count),
                               sigma_h=sigma_h, seed=seed)


@dataclass(frozen=True)
class ToyAction:
    """Deterministic action S0 plus linear fluctuation coupling h * g.

    ``s0`` and ``coupling`` map (phi-array, x) to per-sample action values;
    the optional gradients (with respect to x) feed the closed-form velocity
    oracle and the flatness probes.
    """

    name: str
    s0: callable
    coupling: callable
    dim: int = 1
    s0_grad: callable = None
    coupling_grad: callable = None


def toy_action(name: str, k_s0: float = 0.0) -> ToyAction:
    """Named toy actions: free, linear, bilinear, planar.

    All include an optional deterministic phase S0 = k_s0 * phi * x_1.
    Couplings: free g = 0; linear g = phi; bilinear g = phi * x_1;
    planar (2 parameter axes) g = phi * (x_1 + x_2 + x_1 x_2^2).
    """
    def s0(phi, x):
        return k_s0 * phi * x[0]

    def s0_grad(phi, x):
        g = np.zeros((len(phi), 2 if name == "planar" else 1))
        g[:, 0] = k_s0 * phi
        return g

    if name == "free":
        return ToyAction(name, s0, lambda phi, x: np.zeros_like(phi), 1,
                         s0_grad, lambda phi, x: np.zeros((len(phi), 1)))
    if name == "linear":
        return ToyAction(name, s0, lambda phi, x: phi, 1,
                         s0_grad, lambda phi, x: np.zeros((len(phi), 1)))
    if name == "bilinear":
        return ToyAction(name, s0, lambda phi, x: phi * x[0], 1,
                         s0_grad, lambda phi, x: phi[:, np.newaxis])
    if name == "planar":
        def coupling(phi, x):
            return phi * (x[0] + x[1] + x[0] * x[1] ** 2)

        def coupling_grad(phi, x):
            g = np.empty((len(phi), 2))
            g[:, 0] = phi * (1.0 + x[1] ** 2)
            g[:, 1] = phi * (1.0 + 2.0 * x[0] * x[1])
            return g

        return ToyAction(name, s0, coupling, 2, s0_grad, coupling_grad)
    raise ValueError(f"unknown toy action {name!r}")


@dataclass(frozen=True, eq=False)
class AveragedAmplitude:
    """Phase average over the fluctuation ensemble on a (phi, x) grid."""

    values: np.ndarray        # (N, nx) complex
    xs: np.ndarray            # (nx, d)
    space: ConfigurationSpace
    sample_count: int
    seed: int | None
    backend: str
    workers: int = 1

    def __post_init__(self):
        if np.max(np.abs(self.values), initial=0.0) > 1.0 + MODULUS_SLACK:
            raise ValueError("averaged amplitude exceeds unit modulus")

    @property
    def is_nodal(self) -> bool:
        return bool(np.min(np.abs(self.values)) < NODAL_FLOOR)


def _as_x_grid(xs, dim) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, np.newaxis]
    if xs.ndim != 2 or xs.shape[1] != dim:
        raise ValueError(f"x grid of shape {xs.shape} for a {dim}-axis action")
    return xs


def _chunk_bounds(count: int, workers: int):
    size, extra = divmod(count, workers)
    bounds, start = [], 0
    for i in range(workers):
        stop = start + size + (1 if i < extra else 0)
        if stop > start:
            bounds.append((start, stop))
        start = stop
    return bounds


def phase_mean(angles: np.ndarray, workers: int = 1) -> complex:
    """Mean of exp(i * angles) with worker-chunked deterministic reduction.

    Chunks are contiguous and combined left to right, so the result depends
    only on (angles, workers), not on scheduling.
    """
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    bounds = _chunk_bounds(len(angles), max(1, workers))
    if len(bounds) == 1:
        total = _kernel.tree_phase_sum(angles)
    elif workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _kernel.tree_phase_sum(angles[ab[0]:ab[1]]),
                                  bounds))
        total = 0j
        for part in parts:
            total += part
    else:
        total = 0j
        for a, b in bounds:
            total += _kernel.tree_phase_sum(angles[a:b])
    return total / len(angles)


def averaged_amplitude(action: ToyAction, ensemble: FluctuationEnsemble,
                       space: ConfigurationSpace, xs,
                       constants: PhysicalConstants = DEFAULT_CONSTANTS,
                       workers: int = 1) -> AveragedAmplitude:
    """Monte-Carlo estimate of the averaged phase factor on the (phi, x) grid."""
    if ensemble.count == 0:
        raise ValueError("cannot average over an empty ensemble")
    xs = _as_x_grid(xs, action.dim)
    phi = space.coords
    hbar = constants.hbar
    values = np.empty((space.n, len(xs)), dtype=complex)
    for j, x in enumerate(xs):
        s0 = np.asarray(action.s0(phi, x), dtype=float)
        g = np.asarray(action.coupling(phi, x), dtype=float)
        for i in range(space.n):
            angles = (s0[i] + ensemble.samples * g[i]) / hbar
            values[i, j] = phase_mean(angles, workers=workers)
    return AveragedAmplitude(values=values, xs=xs, space=space,
                             sample_count=ensemble.count, seed=ensemble.seed,
                             backend=KERNEL_BACKEND, workers=workers)


def cumulant_oracle(action: ToyAction, sigma_h: float,
                    space: ConfigurationSpace, xs,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> AveragedAmplitude:
    """Exact Gaussian average exp(i S0/hbar) exp(-sigma_h^2 g^2 / (2 hbar^2))."""
    xs = _as_x_grid(xs, action.dim)
    phi = space.coords
    hbar = constants.hbar
    values = np.empty((space.n, len(xs)), dtype=complex)
    for j, x in enumerate(xs):
        s0 = np.asarray(action.s0(phi, x), dtype=float)
        g = np.asarray(action.coupling(phi, x), dtype=float)
        values[:, j] = np.exp(1j * s0 / hbar) * np.exp(-0.5 * (sigma_h * g / hbar) ** 2)
    return AveragedAmplitude(values=values, xs=xs, space=space,
                             sample_count=0, seed=None, backend="oracle")


def emergent_velocities(amp: AveragedAmplitude, scheme: DerivativeScheme | None = None,
                        constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Velocity fields from the x-log-derivative of the averaged amplitude.

    The amplitude must sit on a single-axis x chain with at least three
    points; central log-ratio differences give one field per interior point.
    """
    if amp.xs.shape[1] != 1:
        raise ValueError("emergent velocities need a single-axis x chain")
    if len(amp.xs) < 3:
        raise BoundaryError("need at least three x points for central differences")
    if amp.is_nodal:
        raise NodalPointError("averaged amplitude fell below the nodal floor")
    hbar, m = constants.hbar, constants.mass
    xs = amp.xs[:, 0]
    fields = []
    for j in range(1, len(xs) - 1):
        ratio = amp.values[:, j + 1] / amp.values[:, j - 1]
        dlog = (np.log(np.abs(ratio)) + 1j * np.angle(ratio)) / (xs[j + 1] - xs[j - 1])
        eta = -1j * (hbar / m) * dlog
        fields.append(VelocityField(pi=eta.real[:, np.newaxis],
                                    u=-eta.imag[:, np.newaxis], x=[xs[j]]))
    return fields


def oracle_velocities(action: ToyAction, sigma_h: float, space: ConfigurationSpace,
                      x, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> VelocityField:
    """Closed-form emergent velocities: u = -(sigma_h^2/(m hbar)) g dg, pi = dS0 / m."""
    if action.s0_grad is None or action.coupling_grad is None:
        raise ValueError(f"toy action {action.name!r} carries no gradients")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi = space.coords
    g = np.asarray(action.coupling(phi, x), dtype=float)
    dg = np.asarray(action.coupling_grad(phi, x), dtype=float)
    ds0 = np.asarray(action.s0_grad(phi, x), dtype=float)
    u = -(sigma_h**2 / (constants.mass * constants.hbar)) * g[:, np.newaxis] * dg
    return VelocityField(pi=ds0 / constants.mass, u=u, x=x)


def oracle_eta_field(action: ToyAction, sigma_h: float, space: ConfigurationSpace,
                     constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """The closed-form complex velocity as a callable x -> (N, d), for flatness probes."""
    def eta(x):
        return oracle_velocities(action, sigma_h, space, x, constants).eta

    return eta
