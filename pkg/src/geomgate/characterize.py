"""Simulated process tomography and randomized benchmarking for one qubit."""

from dataclasses import dataclass
import numpy as np
from scipy.optimize import curve_fit

from .core import PAULIS, PAULI_LABELS, as_matrix, dagger
from .errors import FitFailure, UnphysicalChannel

PSD_FLOOR = -1e-9

# ---------------------------------------------------------------------------
# channels


def unitary_channel(u):
    u = as_matrix(u)
    return lambda rho: u @ rho @ dagger(u)


def depolarizing(q):
    if not 0 <= q <= 1:
        raise ValueError("depolarizing probability must lie in [0, 1]")
    return lambda rho: (1 - q) * rho + q * np.trace(rho) * np.eye(2) / 2


def _as_channel(channel):
    if callable(channel):
        return channel
    arr = np.asarray(channel, dtype=complex)
    if arr.ndim == 2:
        return unitary_channel(arr)
    if arr.ndim == 3:  # Kraus operators
        return lambda rho: sum(k @ rho @ dagger(k) for k in arr)
    raise ValueError("channel must be callable, a unitary or a stack of Kraus operators")


# ---------------------------------------------------------------------------
# process tomography

_PROBES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True)
class ProcessMatrix:
    """Process matrix in the Pauli basis: ``E(rho) = sum chi_mn P_m rho P_n``."""

    chi: np.ndarray
    labels: tuple = PAULI_LABELS

    def fidelity(self, ideal):
        other = ideal.chi if isinstance(ideal, ProcessMatrix) else chi_of_unitary(ideal)
        return float(np.real(np.trace(other @ self.chi)))


def chi_of_unitary(u):
    coeffs = np.array([np.trace(p.conj().T @ as_matrix(u)) / 2 for p in PAULIS])
    return np.outer(coeffs, coeffs.conj())


def _measure(rho, shots, rng):
    """Output density matrix, optionally re-estimated from sampled Pauli outcomes."""
    if shots is None:
        return rho
    est = np.eye(2, dtype=complex) / 2
    for p in PAULIS[1:]:
        prob_up = float(np.clip((1 + np.real(np.trace(p @ rho))) / 2, 0, 1))
        mean = 2 * rng.binomial(shots, prob_up) / shots - 1
        est = est + 0.5 * mean * p
    return est


def qpt(channel, shots=None, seed=None, check_physical=True):
    """Linear-inversion process tomography from the probes |0>, |1>, |+>, |+i>.

    Outputs on the operator basis |j><k| are assembled from the probe outputs,
    giving the superoperator ``S`` (row-major vectorisation); then
    ``chi_mn = Tr(B_mn^dag S) / 4`` with ``B_mn = P_m kron conj(P_n)``.
    """
    chan = _as_channel(channel)
    rng = np.random.default_rng(seed)
    out = {k: _measure(chan(np.outer(v, v.conj())), shots, rng) for k, v in _PROBES.items()}
    diag_sum = out["0"] + out["1"]
    e01 = out["+"] + 1j * out["+i"] - (1 + 1j) / 2 * diag_sum
    e10 = out["+"] - 1j * out["+i"] - (1 - 1j) / 2 * diag_sum
    images = {(0, 0): out["0"], (1, 1): out["1"], (0, 1): e01, (1, 0): e10}
    sup = np.zeros((4, 4), dtype=complex)
    for (j, k), img in images.items():
        basis = np.zeros((2, 2))
        basis[j, k] = 1
        sup += np.outer(img.ravel(), basis.ravel())
    chi = np.empty((4, 4), dtype=complex)
    for m, pm in enumerate(PAULIS):
        for n, pn in enumerate(PAULIS):
            b = np.kron(pm, pn.conj())
            chi[m, n] = np.trace(dagger(b) @ sup) / 4
    chi = 0.5 * (chi + dagger(chi))
    if check_physical and np.linalg.eigvalsh(chi).min() < PSD_FLOOR:
        raise UnphysicalChannel("reconstructed process matrix is not positive semidefinite")
    return ProcessMatrix(chi)


def process_to_average_fidelity(fp, d=2):
    return (d * fp + 1) / (d + 1)


# ---------------------------------------------------------------------------
# Clifford group

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(complex)

# Generator words in time order (first letter applied first), one per element.
CLIFFORD_WORDS = (
    "", "H", "S", "HS", "SH", "SS", "HSH", "HSS", "SHS", "SSH", "SSS", "HSHS",
    "HSSH", "HSSS", "SHSS", "SSHS", "HSHSS", "HSSHS", "SHSSH", "SHSSS", "SSHSS",
    "HSHSSH", "HSHSSS", "HSSHSS",
)


def _word_unitary(word):
    u = np.eye(2, dtype=complex)
    for letter in word:
        u = {"H": _H, "S": _S}[letter] @ u
    return u


CLIFFORDS = np.array([_word_unitary(w) for w in CLIFFORD_WORDS])


def same_up_to_phase(u, v, atol=1e-9):
    return abs(abs(np.trace(dagger(u) @ v)) / u.shape[0] - 1) < atol


# ---------------------------------------------------------------------------
# randomized benchmarking


@dataclass(frozen=True)
class RBResult:
    lengths: np.ndarray
    sequence_fidelities: np.ndarray
    decay_p: float
    p_stderr: float
    amplitude: float
    offset: float

    @property
    def avg_gate_fidelity(self):
        return (1 + self.decay_p) / 2


def _decay(m, a, p, b):
    return a * p**m + b


def fit_decay(lengths, fids, stderr=None):
    """Fit ``A p^m + B``; weighted by per-length standard errors when all are positive."""
    lengths = np.asarray(lengths, dtype=float)
    fids = np.asarray(fids, dtype=float)
    if np.ptp(fids) < 1e-12:
        # no decay visible: p = 1 with the amplitude undetermined
        return 1.0, 0.0, float(fids.mean() - 0.5), 0.5
    weighted = stderr is not None and np.all(np.asarray(stderr) > 0)
    try:
        popt, pcov = curve_fit(
            _decay, lengths, fids, p0=(0.5, 0.99, 0.5),
            sigma=np.asarray(stderr) if weighted else None, absolute_sigma=weighted,
            bounds=([-1.0, 0.0, -1.0], [2.0, 1.0, 2.0]), maxfev=20000,
            ftol=1e-15, xtol=1e-15, gtol=1e-15,
        )
    except RuntimeError as exc:
        raise FitFailure(str(exc)) from None
    a, p, b = popt
    err = float(np.sqrt(max(pcov[1, 1], 0.0))) if np.all(np.isfinite(pcov)) else float("inf")
    if not 0 < p <= 1:
        raise FitFailure(f"decay parameter {p} outside (0, 1]")
    return float(p), err, float(a), float(b)


def rb_run(lengths, sequences_per_length=50, seed=0, depolarizing_q=0.0, interleaved=None,
           interleaved_ideal=None, shots=None):
    """Single-qubit (interleaved) randomized benchmarking by density-matrix simulation.

    Every Clifford, including the recovery, is followed by a depolarizing
    channel of strength ``depolarizing_q``. ``interleaved`` is the implemented
    unitary of a gate inserted after each random Clifford; its ideal
    (``interleaved_ideal``, default the same matrix) enters the recovery.
    Sequence ``(i, j)`` draws from ``default_rng([seed, i, j])`` so results do
    not depend on evaluation order.
    """
    lengths = np.asarray(sorted(set(int(m) for m in lengths)))
    if len(lengths) < 2:
        raise ValueError("need at least two sequence lengths")
    if sequences_per_length < 10:
        raise ValueError("need at least ten sequences per length")
    noise = depolarizing(depolarizing_q)
    gate = None if interleaved is None else as_matrix(interleaved)
    gate_ideal = gate if interleaved_ideal is None else as_matrix(interleaved_ideal)
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    means, errs = [], []
    for i, m in enumerate(lengths):
        vals = []
        for j in range(sequences_per_length):
            rng = np.random.default_rng([seed, i, j])
            picks = rng.integers(0, len(CLIFFORDS), size=m)
            rho = rho0
            ideal = np.eye(2, dtype=complex)
            for c in CLIFFORDS[picks]:
                rho = noise(c @ rho @ dagger(c))
                ideal = c @ ideal
                if gate is not None:
                    rho = gate @ rho @ dagger(gate)
                    ideal = gate_ideal @ ideal
            rec = dagger(ideal)
            rho = noise(rec @ rho @ dagger(rec))
            surv = float(np.real(rho[0, 0]))
            if shots is not None:
                surv = rng.binomial(shots, np.clip(surv, 0, 1)) / shots
            vals.append(surv)
        means.append(np.mean(vals))
        errs.append(np.std(vals, ddof=1) / np.sqrt(len(vals)))
    means = np.array(means)
    p, err, a, b = fit_decay(lengths, means, np.array(errs))
    return RBResult(lengths, means, p, err, a, b)


def interleaved_gate_fidelity(reference, interleaved, d=2):
    """Standard estimate ``1 - (d-1)/d (1 - p_int/p_ref)``."""
    return 1 - (d - 1) / d * (1 - interleaved.decay_p / reference.decay_p)
