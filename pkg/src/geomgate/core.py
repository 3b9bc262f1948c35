"""Small dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Everything here
works on a single matrix or on a stack ``(..., d, d)`` so that propagators for
thousands of time steps can be built in one call.
"""

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NonHermitianInput

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)
PAULI_LABELS = ("I", "X", "Y", "Z")

HERMITIAN_ATOL = 1e-10
UNITARY_ATOL = 1e-8


def as_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch(f"expected square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a):
    return np.swapaxes(np.conj(a), -1, -2)


def hermiticity_defect(h):
    h = np.asarray(h)
    return float(np.max(np.abs(h - dagger(h)), initial=0.0))


def unitarity_defect(u):
    """Max-norm of ``U^dagger U - I`` (maximum over a stack)."""
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(dagger(u) @ u - eye), initial=0.0))


def mat_exp(h, t=1.0, check=True):
    """Return ``exp(-i H t)`` for Hermitian ``H``.

    Uses the Hermitian eigendecomposition, so the result is unitary to machine
    precision. ``h`` may be a stack of matrices and ``t`` a scalar or an array
    broadcastable against the stack's leading axes.

    Raises:
        NonHermitianInput: if ``H`` deviates from Hermitian by more than 1e-10
            (relative to its scale) and ``check`` is true.
    """
    h = as_matrix(h)
    if check:
        scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
        if hermiticity_defect(h) > HERMITIAN_ATOL * scale:
            raise NonHermitianInput("generator is not Hermitian")
    h = 0.5 * (h + dagger(h))
    w, v = np.linalg.eigh(h)
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * w * t[..., None])
    return (v * phases[..., None, :]) @ dagger(v)


def ordered_product(stack):
    """Time-ordered product ``U_{N-1} ... U_1 U_0`` of a stack of matrices.

    Pairwise tree reduction keeps this vectorised; the order of
    multiplication is preserved exactly.
    """
    us = np.asarray(stack)
    if us.shape[0] == 0:
        return np.eye(us.shape[-1], dtype=complex)
    while us.shape[0] > 1:
        if us.shape[0] % 2:
            pad = np.eye(us.shape[-1], dtype=us.dtype)[None]
            us = np.concatenate([us, pad])
        us = us[1::2] @ us[0::2]
    return us[0]


def cumulative_product(stack, initial=None):
    """Running products ``[P_0, P_1, ..., P_N]`` with ``P_k = U_{k-1} ... U_0 P_0``."""
    us = np.asarray(stack)
    d = us.shape[-1]
    out = np.empty((us.shape[0] + 1, d, d), dtype=complex)
    out[0] = np.eye(d) if initial is None else initial
    for k in range(us.shape[0]):
        out[k + 1] = us[k] @ out[k]
    return out


def gate_fidelity(u, v):
    """Global-phase-insensitive overlap ``|Tr(U^dagger V)| / d``."""
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes differ: {u.shape} vs {v.shape}")
    d = u.shape[-1]
    f = np.abs(np.trace(dagger(u) @ v, axis1=-2, axis2=-1)) / d
    return np.minimum(f, 1.0) if np.ndim(f) else float(min(f, 1.0))


def subspace_fidelity(u, v, basis_indices):
    """Fidelity restricted to the listed basis states.

    ``|Tr(P U^dagger V P)| / n`` with ``P`` the projector onto
    ``basis_indices``; ``v`` may be given either at full dimension or already
    restricted to the ``n``-dimensional subspace.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    idx = list(basis_indices)
    d = u.shape[-1]
    if len(set(idx)) != len(idx):
        raise IndexOutOfRange("basis indices must be distinct")
    if any(i < 0 or i >= d for i in idx):
        raise IndexOutOfRange(f"basis index outside 0..{d - 1}")
    if v.shape != u.shape:
        if v.shape != (len(idx), len(idx)):
            raise DimensionMismatch(f"cannot compare {u.shape} with {v.shape}")
        # a reduced target only prescribes the subspace block
        full = np.zeros_like(u)
        full[np.ix_(idx, idx)] = v
        v = full
    block = (dagger(u) @ v)[np.ix_(idx, idx)]
    return float(min(abs(np.trace(block)) / len(idx), 1.0))


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def bloch_vector(psi):
    """Bloch coordinates ``(x, y, z)`` of a (stack of) normalised qubit state(s)."""
    psi = np.asarray(psi, dtype=complex)
    a, b = psi[..., 0], psi[..., 1]
    x = 2 * np.real(np.conj(a) * b)
    y = 2 * np.imag(np.conj(a) * b)
    z = np.abs(a) ** 2 - np.abs(b) ** 2
    return np.stack([x, y, z], axis=-1)


def rotation(theta, axis):
    """SU(2) rotation ``exp(-i theta/2 n.sigma)`` about a unit 3-vector."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    gen = n[0] * SX + n[1] * SY + n[2] * SZ
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * gen


def random_unitary(d, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(d, rng, scale=1.0):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (z + z.conj().T)
