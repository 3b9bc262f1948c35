"""Single-qubit time evolution under a pulse schedule with a Rabi error."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import I2, SX, SY, cumulative_product, gate_fidelity, ordered_product, unitarity_defect
from .errors import DegenerateFit, EvolutionFailed, StepTooCoarse

DEFAULT_STEPS = 4096
MIN_STEPS = 256
HALVING_TOL = 1e-8


@dataclass(frozen=True)
class ErrorModel:
    """Quasi-static multiplicative drive error: ``Omega -> (1 + epsilon) Omega``."""

    epsilon: float = 0.0
    kind: str = "RabiProportional"
    max_abs: float = 1.0

    def __post_init__(self):
        if self.kind != "RabiProportional":
            raise ValueError(f"unsupported error kind {self.kind!r}")
        if not np.isfinite(self.epsilon) or abs(self.epsilon) >= self.max_abs:
            raise ValueError(f"|epsilon| must be below {self.max_abs}")

    @property
    def scale(self):
        return 1.0 + self.epsilon


@dataclass(frozen=True)
class EvolutionResult:
    final_unitary: np.ndarray
    steps: int
    max_unitarity_defect: float
    halving_change: Optional[float] = None
    times: Optional[np.ndarray] = None
    propagators: Optional[np.ndarray] = None

    def states(self, initial):
        """Evolved state(s) on the stored grid for initial vector(s) ``initial``."""
        if self.propagators is None:
            raise ValueError("evolve(..., keep_grid=True) is needed for sampled states")
        return self.propagators @ np.asarray(initial, dtype=complex)


@dataclass(frozen=True)
class SweepResult:
    epsilons: np.ndarray
    fidelities: np.ndarray
    fitted_slope: float
    fit_range: Tuple[float, float]
    fit_intercept: float = float("nan")

    @property
    def points(self):
        return list(zip(self.epsilons.tolist(), self.fidelities.tolist()))

    @property
    def infidelities(self):
        return 1.0 - self.fidelities


def drive_hamiltonian(amplitude, phase):
    """``Omega/2 (cos(phi) sx + sin(phi) sy)`` for scalars or arrays."""
    a = np.asarray(amplitude, dtype=float)[..., None, None]
    p = np.asarray(phase, dtype=float)[..., None, None]
    return 0.5 * a * (np.cos(p) * SX + np.sin(p) * SY)


def _step_unitaries(amplitude, phase, dt):
    # exact exponential of an equatorial generator: rotation by Omega*dt
    half = 0.5 * np.asarray(amplitude) * dt
    c = np.cos(half)[:, None, None]
    s = np.sin(half)[:, None, None]
    p = np.asarray(phase)[:, None, None]
    gen = np.cos(p) * SX + np.sin(p) * SY
    return c * I2 - 1j * s * gen


def segment_grid(segment, steps):
    """Node times (local, ``steps + 1`` points) of a uniform grid on a segment."""
    return np.linspace(0.0, segment.duration, steps + 1)


def _segment_steps(segment, steps, scale):
    dt = segment.duration / steps
    mids = (np.arange(steps) + 0.5) * dt
    return _step_unitaries(scale * segment.amplitude(mids), segment.drive_phase(mids), dt)


def _propagate(schedule, steps, scale, keep_grid):
    u = I2.copy()
    grids, props = [], []
    t0 = 0.0
    for seg in schedule.segments:
        stack = _segment_steps(seg, steps, scale)
        if keep_grid:
            cum = cumulative_product(stack, initial=u)
            grids.append(t0 + segment_grid(seg, steps))
            props.append(cum)
            u = cum[-1]
        else:
            u = ordered_product(stack) @ u
        t0 += seg.duration
    if not keep_grid:
        return u, None, None
    return u, np.concatenate(grids), np.concatenate(props)


def evolve(schedule, error=None, steps_per_segment=DEFAULT_STEPS, check=True, keep_grid=False):
    """Propagate a schedule by a product of midpoint exponentials.

    With ``check`` the run is repeated at twice the step count and
    ``StepTooCoarse`` is raised if the fidelity between the two propagators
    differs from one by more than 1e-8. With ``keep_grid`` the propagator at
    every segment node is returned (segment boundaries appear twice).
    """
    if steps_per_segment < MIN_STEPS:
        raise ValueError(f"steps_per_segment must be at least {MIN_STEPS}")
    scale = (error or ErrorModel()).scale
    u, times, props = _propagate(schedule, steps_per_segment, scale, keep_grid)
    if not np.all(np.isfinite(u)):
        raise EvolutionFailed("non-finite propagator")
    defect = unitarity_defect(u if props is None else props)
    if defect > 1e-8:
        raise EvolutionFailed(f"unitarity defect {defect:.2e}")
    change = None
    if check:
        fine, _, _ = _propagate(schedule, 2 * steps_per_segment, scale, False)
        change = 1.0 - gate_fidelity(u, fine)
        if change > HALVING_TOL:
            raise StepTooCoarse(
                f"step halving changed fidelity by {change:.2e} at {steps_per_segment} steps"
            )
    return EvolutionResult(u, steps_per_segment * len(schedule.segments), defect, change, times, props)


def _workers():
    try:
        return max(1, int(os.environ.get("GEOMGATE_THREADS", "1")))
    except ValueError:
        return 1


def fit_loglog(x, y, floor=1e-12):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y >= floor)
    if ok.sum() < 3:
        raise DegenerateFit(f"only {int(ok.sum())} usable points for a log-log fit")
    slope, intercept = np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)
    return float(slope), float(intercept)


def fidelity_sweep(schedule, ideal, eps_grid, fit_range=None, steps_per_segment=DEFAULT_STEPS,
                   check=True, workers=None):
    """Fidelity to ``ideal`` over a grid of Rabi errors plus a log-log slope fit.

    The slope of ``log(1 - F)`` against ``log|epsilon|`` uses grid points with
    ``|epsilon|`` inside ``fit_range`` (default: the whole grid) and
    ``1 - F >= 1e-12``.
    """
    eps = np.asarray(eps_grid, dtype=float)
    if len(np.unique(eps)) != len(eps):
        raise ValueError("epsilon grid values must be distinct")

    def one(e):
        res = evolve(schedule, ErrorModel(e), steps_per_segment, check)
        return gate_fidelity(ideal, res.final_unitary)

    n = workers or _workers()
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            fids = np.array(list(pool.map(one, eps)))
    else:
        fids = np.array([one(e) for e in eps])
    fids = np.clip(fids, 0.0, 1.0)
    mags = np.abs(eps)
    if fit_range is None:
        pos = mags[mags > 0]
        fit_range = (pos.min() if pos.size else 0.0, mags.max())
    lo, hi = fit_range
    sel = (mags >= lo) & (mags <= hi)
    slope, intercept = fit_loglog(mags[sel], 1.0 - fids[sel])
    return SweepResult(eps, fids, slope, (float(lo), float(hi)), intercept)


def first_order_fidelity(schedule, epsilon, steps_per_segment=DEFAULT_STEPS):
    """Perturbative fidelity ``1 - 1/4 sum |D_mn|^2`` with ``D = epsilon * D/epsilon``.

    Only valid to leading order; exact evolution differs at higher order in
    ``epsilon``.
    """
    if epsilon == 0:
        return 1.0
    from .geometry import robustness_integral

    d = robustness_integral(schedule, steps_per_segment=steps_per_segment).matrix
    return float(1.0 - 0.25 * np.sum(np.abs(epsilon * d) ** 2))
