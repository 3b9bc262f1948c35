"""Auxiliary-state paths, constraint checks, geometric phase and robustness integrals.

A path is described by the Bloch angles of the auxiliary state

    xi1 = cos(a/2)|0> + sin(a/2) e^{i lam}|1>,
    xi2 = sin(a/2) e^{-i lam}|0> - cos(a/2)|1>,

given piecewise per segment. Under the drive ``Omega/2 (cos phi sx + sin phi sy)``
the frame is followed without off-diagonal coupling when

    a_dot = Omega sin(phi - lam),   lam_dot = -Omega cos(phi - lam) / tan(a).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import simpson

from .core import I2, SX, SY, bloch_vector, dagger
from .errors import BoundaryTime, SingularPath
from .evolution import DEFAULT_STEPS, ErrorModel, drive_hamiltonian, evolve
from .pulses import Envelope, PulseSchedule, PulseSegment, ideal_gate, sssp_shape

PI = np.pi
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class PathSegment:
    """One smooth piece of an auxiliary-state path.

    ``alpha_inc(t)`` is ``a(t) - a(t_start)`` in local time; ``lam(t)`` the
    azimuth. Derivatives are supplied alongside so nothing is differentiated
    numerically. ``kind``/``params`` record the closed form for re-emission as
    a pulse (``sin2``: ``a_dot = rate sin^2(pi t/T)`` with constant ``lam``;
    ``idle``; ``sssp``; ``custom``).
    """

    duration: float
    alpha_inc: Callable
    dalpha: Callable
    lam: Callable
    dlam: Callable
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    @classmethod
    def sin_squared(cls, duration, rate, lam):
        w = 2 * PI / duration
        return cls(
            duration,
            lambda t: rate * (np.asarray(t) / 2 - np.sin(w * np.asarray(t)) / (2 * w)),
            lambda t: rate * np.sin(PI * np.asarray(t) / duration) ** 2,
            lambda t: np.full_like(np.asarray(t, dtype=float), lam),
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            "sin2",
            {"rate": float(rate), "lam": float(lam)},
        )

    @classmethod
    def idle(cls, duration, lam):
        zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
        return cls(duration, zero, zero, lambda t: np.full_like(np.asarray(t, dtype=float), lam),
                   zero, "idle", {"lam": float(lam)})

    @classmethod
    def sssp(cls, duration, params):
        T = duration

        def parts(t):
            return sssp_shape(np.asarray(t, dtype=float) / T, params)

        return cls(
            duration,
            lambda t: parts(t)[0],
            lambda t: parts(t)[1] / T,
            lambda t: parts(t)[2],
            lambda t: parts(t)[3] / T,
            "sssp",
            dict(params),
        )


@dataclass(frozen=True)
class PathSpec:
    segments: Tuple[PathSegment, ...]
    alpha0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_duration(self):
        return float(sum(s.duration for s in self.segments))

    @property
    def boundaries(self):
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def segment_starts(self):
        """Polar angle at the start of each segment (continuity by construction)."""
        starts = [self.alpha0]
        for seg in self.segments[:-1]:
            starts.append(starts[-1] + float(seg.alpha_inc(seg.duration)))
        return starts

    def locate(self, t):
        edges = self.boundaries
        if t < -BOUNDARY_TOL or t > edges[-1] + BOUNDARY_TOL:
            raise BoundaryTime(f"t={t} outside [0, {edges[-1]}]")
        k = int(np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(self.segments) - 1))
        return k, t - edges[k]

    def angles(self, t):
        """``(alpha, alpha_dot, lam, lam_dot)`` at global time ``t``."""
        k, tl = self.locate(t)
        seg = self.segments[k]
        a = self.segment_starts()[k] + float(seg.alpha_inc(tl))
        return a, float(seg.dalpha(tl)), float(seg.lam(tl)), float(seg.dlam(tl))

    def final_alpha(self):
        last = self.segments[-1]
        return self.segment_starts()[-1] + float(last.alpha_inc(last.duration))


def auxiliary_states(alpha, lam):
    """Return ``(xi1, xi2)`` for scalar angles."""
    c, s = np.cos(alpha / 2), np.sin(alpha / 2)
    xi1 = np.array([c, s * np.exp(1j * lam)])
    xi2 = np.array([s * np.exp(-1j * lam), -c])
    return xi1, xi2


def _auxiliary_derivatives(alpha, dalpha, lam, dlam):
    c, s = np.cos(alpha / 2), np.sin(alpha / 2)
    e = np.exp(1j * lam)
    d1 = dalpha * np.array([-s / 2, c / 2 * e]) + dlam * np.array([0, 1j * s * e])
    d2 = dalpha * np.array([c / 2 / e, s / 2]) + dlam * np.array([-1j * s / e, 0])
    return d1, d2


# ---------------------------------------------------------------------------
# schedule <-> path


def path_from_schedule(schedule, alpha0=0.0):
    """Recover the auxiliary path of a geometric schedule.

    Needs either constant-phase ``SinSquared`` segments carrying ``path_lambda``
    (then ``a_dot = Omega sin(phi - lam)``) or a shaped ``TableFormula`` segment.
    """
    segs = []
    for seg in schedule.segments:
        kind = seg.envelope.kind
        if kind == "TableFormula":
            segs.append(PathSegment.sssp(seg.duration, dict(seg.envelope.params)))
        elif seg.path_lambda is not None and kind in ("SinSquared", "Constant"):
            rate = seg.envelope.params["amplitude"] * np.sin(seg.phase - seg.path_lambda)
            if kind == "SinSquared":
                segs.append(PathSegment.sin_squared(seg.duration, rate, seg.path_lambda))
            elif seg.envelope.params["amplitude"] == 0:
                segs.append(PathSegment.idle(seg.duration, seg.path_lambda))
            else:
                raise SingularPath("constant drive with constant azimuth leaves the frame")
        else:
            raise ValueError(f"segment of {schedule.name!r} carries no path description")
    return PathSpec(tuple(segs), alpha0)


def drive_from_path(path, t):
    """Amplitude and phase that keep the frame aligned, pointwise in ``t``.

    ``Omega = sqrt(a_dot^2 + (lam_dot tan a)^2)`` and
    ``phi = lam + atan2(a_dot, -lam_dot tan a)`` (the branch with Omega >= 0).
    """
    a, da, lam, dlam = path.angles(t)
    transverse = -dlam * np.tan(a)
    omega = float(np.hypot(da, transverse))
    if not np.isfinite(omega):
        raise SingularPath(f"drive amplitude diverges at t={t}")
    return omega, float(lam + np.arctan2(da, transverse))


def path_to_pulse(path, name="path", scheme="SR_NGQG", gate=None, omega0_hz=None):
    """Emit the drive schedule realising ``path``.

    Closed-form segment kinds map to closed-form envelopes: ``sin2`` with
    constant azimuth gives ``SinSquared`` at ``phi = lam + pi/2`` (``- pi/2``
    for a decreasing polar angle), ``idle`` gives zero drive and ``sssp`` the
    shaped formula.
    """
    out = []
    for seg in path.segments:
        if seg.kind == "sin2":
            rate, lam = seg.params["rate"], seg.params["lam"]
            if rate == 0:
                raise SingularPath("zero-rate sin^2 segment; use an idle segment")
            out.append(PulseSegment(
                seg.duration,
                Envelope("SinSquared", {"amplitude": abs(rate)}),
                lam + np.sign(rate) * PI / 2,
                path_alpha="area",
                path_lambda=lam,
            ))
        elif seg.kind == "idle":
            out.append(PulseSegment(seg.duration, Envelope("Constant", {"amplitude": 0.0}),
                                    seg.params["lam"] + PI / 2, path_lambda=seg.params["lam"]))
        elif seg.kind == "sssp":
            out.append(PulseSegment(seg.duration, Envelope("TableFormula", seg.params), 0.0,
                                    path_alpha="sssp"))
        else:
            raise ValueError("custom path segments have no closed-form envelope")
    kwargs = {} if omega0_hz is None else {"omega0_hz": omega0_hz}
    return PulseSchedule(name, tuple(out), scheme, gate, **kwargs)


def _interior_grid(path, samples):
    """Sample times strictly inside segments, ``samples`` in total."""
    per = max(2, samples // len(path.segments))
    ts = []
    for t0, seg in zip(path.boundaries[:-1], path.segments):
        u = (np.arange(per) + 0.5) / per
        ts.append(t0 + u * seg.duration)
    return np.concatenate(ts)


def constraint_residual(path, schedule, samples=10_000, amp_floor=1e-6):
    """Max deviation of the schedule's drive from the path-following drive.

    Returns ``(amplitude_residual, phase_residual)``; the phase is compared only
    where the amplitude exceeds ``amp_floor``.
    """
    amp_res = 0.0
    ph_res = 0.0
    for t in _interior_grid(path, samples):
        omega, phi = drive_from_path(path, t)
        o_s, p_s = _schedule_drive(schedule, t)
        amp_res = max(amp_res, abs(omega - o_s))
        if omega > amp_floor:
            ph_res = max(ph_res, abs(np.angle(np.exp(1j * (phi - p_s)))))
    return amp_res, ph_res


def _schedule_drive(schedule, t, scale=1.0):
    edges = schedule.boundaries
    k = int(np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(schedule.segments) - 1))
    seg = schedule.segments[k]
    tl = t - edges[k]
    return scale * float(seg.amplitude(tl)), float(seg.drive_phase(tl))


# ---------------------------------------------------------------------------
# A/K matrices and phases


@dataclass(frozen=True)
class GeomKinetics:
    A: np.ndarray
    K: np.ndarray

    @property
    def A_diag(self):
        return float(np.real(self.A[0, 0]))

    @property
    def K_diag(self):
        return float(np.real(self.K[0, 0]))

    @property
    def offdiag_residual(self):
        return complex((self.A + self.K)[0, 1])


def ak_matrices(path, schedule, t, epsilon=0.0):
    """``A_ij = i<xi_i|d/dt xi_j>`` and ``K_ij = -<xi_i|H|xi_j>`` at an interior time.

    ``epsilon`` scales the schedule's drive by ``1 + epsilon``, which is how a
    Rabi error shows up as a nonzero off-diagonal residual.
    """
    edges = path.boundaries
    if np.min(np.abs(edges - t)) < BOUNDARY_TOL or t < 0 or t > edges[-1]:
        raise BoundaryTime(f"t={t} is a segment boundary or outside the path")
    a, da, lam, dlam = path.angles(t)
    xi = auxiliary_states(a, lam)
    dxi = _auxiliary_derivatives(a, da, lam, dlam)
    omega, phi = _schedule_drive(schedule, t, 1.0 + epsilon)
    h = drive_hamiltonian(omega, phi)
    A = np.array([[1j * np.vdot(xi[i], dxi[j]) for j in range(2)] for i in range(2)])
    K = np.array([[-np.vdot(xi[i], h @ xi[j]) for j in range(2)] for i in range(2)])
    return GeomKinetics(A, K)


def _segment_integral(seg, a_start, integrand, n=4096):
    t = np.linspace(0.0, seg.duration, n + 1)
    a = a_start + seg.alpha_inc(t)
    return float(simpson(integrand(a, seg.dlam(t)), x=t))


def dynamical_phase_check(path, schedule=None, n=4096):
    """``int lam_dot sin(a) tan(a) dt`` over the smooth parts of the path.

    Azimuth jumps between segments are frame realignments and are not part of
    this integral (see ``jump_contributions``).
    """
    total = 0.0
    for seg, a0 in zip(path.segments, path.segment_starts()):
        if seg.kind in ("sin2", "idle"):
            continue  # lam_dot is identically zero
        total += _segment_integral(seg, a0, lambda a, dl: dl * np.sin(a) * np.tan(a), n)
    return total


def jump_contributions(path):
    """``(delta_lam, alpha)`` at every interior boundary where the azimuth jumps."""
    out = []
    starts = path.segment_starts()
    for k in range(1, len(path.segments)):
        prev = path.segments[k - 1]
        lam_end = float(prev.lam(prev.duration))
        lam_start = float(path.segments[k].lam(0.0))
        if lam_end != lam_start:
            out.append((lam_start - lam_end, starts[k]))
    return out


def geometric_phase(path, n=4096):
    """``-int lam_dot sin^2(a/2) dt`` plus ``-delta_lam sin^2(a/2)`` per azimuth jump."""
    total = 0.0
    for seg, a0 in zip(path.segments, path.segment_starts()):
        if seg.kind in ("sin2", "idle"):
            continue
        total += _segment_integral(seg, a0, lambda a, dl: -dl * np.sin(a / 2) ** 2, n)
    for dlam, a in jump_contributions(path):
        total -= dlam * np.sin(a / 2) ** 2
    return total


def total_phase(path, n=4096):
    """Geometric phase plus the dynamical part ``1/2 int lam_dot sin(a) tan(a) dt``."""
    return geometric_phase(path, n) + 0.5 * dynamical_phase_check(path, n=n)


def _transport(a_s, lam_s, a_e, lam_e, g):
    xs = auxiliary_states(a_s, lam_s)
    xe = auxiliary_states(a_e, lam_e)
    return np.exp(1j * g) * np.outer(xe[0], xs[0].conj()) + np.exp(-1j * g) * np.outer(
        xe[1], xs[1].conj()
    )


def path_gate(path, n=4096):
    """Ideal gate as the product of per-segment frame transports.

    Within a segment the evolved states follow the frame, so the segment maps
    ``xi_k(start) -> e^{+-ig} xi_k(end)`` with ``g`` its total phase. Azimuth
    jumps are handled exactly because each segment uses its own frame.
    """
    u = I2.copy()
    for seg, a0 in zip(path.segments, path.segment_starts()):
        one = PathSpec((seg,), a0)
        a1 = one.final_alpha()
        u = _transport(a0, float(seg.lam(0.0)), a1, float(seg.lam(seg.duration)),
                       total_phase(one, n)) @ u
    return u


def jump_bookkeeping_gate(path, n=4096):
    """``e^{ig}|xi1(T)><xi1(0)| + e^{-ig}|xi2(T)><xi2(0)|`` with jump terms in ``g``.

    Treats azimuth jumps as contributing ``-delta_lam sin^2(a/2)`` to the
    phase. This reproduces the evolved X gate; it is not exact for general
    open paths (``path_gate`` is).
    """
    first, last = path.segments[0], path.segments[-1]
    return _transport(path.alpha0, float(first.lam(0.0)), path.final_alpha(),
                      float(last.lam(last.duration)), total_phase(path, n))


# ---------------------------------------------------------------------------
# robustness integral


@dataclass(frozen=True)
class RobustnessIntegral:
    """``D/epsilon`` in the auxiliary basis at ``t = 0``.

    ``matrix[m, n] = int <psi_m|H0|psi_n> dt``. ``magnitude`` is the
    basis-independent size ``sqrt(1/2 sum |D_mn|^2)``; it bounds ``|D12|`` and
    equals it whenever the diagonal vanishes.
    """

    matrix: np.ndarray
    scheme: str = ""
    gate: Optional[str] = None

    @property
    def d12(self):
        return complex(self.matrix[0, 1])

    @property
    def d21(self):
        return complex(self.matrix[1, 0])

    @property
    def magnitude(self):
        return float(np.sqrt(0.5 * np.sum(np.abs(self.matrix) ** 2)))

    @property
    def sign(self):
        """Sign of ``Re D12`` (0 when it vanishes to 1e-9)."""
        r = self.d12.real
        return 0 if abs(r) < 1e-9 else int(np.sign(r))


def auxiliary_basis(schedule):
    """Columns ``xi1(0)``, ``xi2(0)`` used for ``D``.

    Cyclic reference schemes start their frame on the eigenstates of the
    target rotation axis; the open-path, shaped and dynamical schemes start at
    ``a(0) = 0``, i.e. ``|0>`` and ``-|1>``.
    """
    if schedule.scheme in ("NGQG_P1", "NGQG_P2") and schedule.gate is not None:
        gate = ideal_gate(schedule.gate)
        gen = 1j * (gate - np.trace(gate) / 2 * I2)  # proportional to n.sigma
        w, v = np.linalg.eigh(0.5 * (gen + dagger(gen)))
        return v[:, ::-1]
    return np.array([[1, 0], [0, -1]], dtype=complex)


def robustness_integral(schedule, epsilon=1.0, steps_per_segment=DEFAULT_STEPS, basis=None):
    """Normalised robustness integral of a schedule under ``V = epsilon H0``.

    The evolved states are those of the error-free drive, so ``D/epsilon`` is
    independent of ``epsilon``. ``basis`` (columns ``xi1(0)``, ``xi2(0)``)
    defaults to ``|0>, -|1>``. Quadrature is composite Simpson on the
    evolution nodes of each segment.
    """
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero for the normalised integral")
    if steps_per_segment % 2:
        raise ValueError("Simpson quadrature needs an even step count")
    res = evolve(schedule, ErrorModel(), steps_per_segment, check=True, keep_grid=True)
    b = auxiliary_basis(schedule) if basis is None else np.asarray(basis, dtype=complex)
    n = steps_per_segment + 1
    m = np.zeros((2, 2), dtype=complex)
    for k, seg in enumerate(schedule.segments):
        tl = np.linspace(0.0, seg.duration, n)
        u = res.propagators[k * n:(k + 1) * n]
        h = drive_hamiltonian(seg.amplitude(tl), seg.drive_phase(tl))
        m += simpson(dagger(u) @ h @ u, x=tl, axis=0)
    return RobustnessIntegral(dagger(b) @ m @ b, schedule.scheme, schedule.gate)


# ---------------------------------------------------------------------------
# trajectories


def bloch_trajectory(path, schedule, epsilon=0.0, samples=201, steps_per_segment=DEFAULT_STEPS):
    """Bloch coordinates of the evolved ``xi1(0)`` at ``samples`` evenly spaced times.

    Returns an array of rows ``(t, x, y, z)``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    res = evolve(schedule, ErrorModel(epsilon), steps_per_segment, check=False, keep_grid=True)
    lam0 = float(path.segments[0].lam(0.0)) if path is not None else 0.0
    a0 = path.alpha0 if path is not None else 0.0
    psi0 = auxiliary_states(a0, lam0)[0]
    ts = np.linspace(0.0, schedule.total_duration, samples)
    edges = schedule.boundaries
    n = steps_per_segment + 1
    rows = []
    for t in ts:
        k = int(np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(schedule.segments) - 1))
        seg = schedule.segments[k]
        tl = t - edges[k]
        dt = seg.duration / steps_per_segment
        j = min(int(tl / dt), steps_per_segment)
        u = res.propagators[k * n + j]
        rest = tl - j * dt
        if rest > 0:
            mid = j * dt + rest / 2
            o = (1 + epsilon) * float(seg.amplitude(mid))
            p = float(seg.drive_phase(mid))
            gen = np.cos(p) * SX + np.sin(p) * SY
            u = (np.cos(o * rest / 2) * I2 - 1j * np.sin(o * rest / 2) * gen) @ u
        rows.append([t, *bloch_vector(u @ psi0)])
    return np.array(rows)
