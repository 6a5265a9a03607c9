"""Dense complex linear algebra on square matrices.

Composite indices follow the ancilla-major convention: for a space
``K (x) H`` the pair ``(k, h)`` maps to ``k * dimH + h``.  This is the
ordering produced by :func:`numpy.kron` with the ancilla as left factor.
"""

from __future__ import annotations

import os

import numpy as np

DEFAULT_DIM_CAP = 4096

_dim_cap = int(os.environ.get("INFOTRANSFER_DIM_CAP", DEFAULT_DIM_CAP))

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


class DimensionError(ValueError):
    """Raised when operand dimensions are incompatible."""


class DimensionLimitError(DimensionError):
    """Raised when a dense operator would exceed the configured size cap."""


def get_dim_cap() -> int:
    return _dim_cap


def set_dim_cap(cap: int) -> int:
    """Set the dense dimension cap, returning the previous value."""
    global _dim_cap
    if cap < 1:
        raise ValueError(f"dimension cap must be positive, got {cap}")
    old, _dim_cap = _dim_cap, int(cap)
    return old


def check_dim(dim: int) -> None:
    if dim > _dim_cap:
        raise DimensionLimitError(
            f"dimension {dim} exceeds the dense cap {_dim_cap}"
        )


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square complex array.

    Returns a read-only view so accidental in-place edits fail loudly.
    """
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] == 0:
        raise DimensionError(f"{name} must have positive dimension")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    check_dim(m.shape[0])
    m.setflags(write=False)
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def tensor(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the outer (most significant) factor."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    check_dim(a.shape[0] * b.shape[0])
    return np.kron(a, b)


def tensor_all(ops) -> np.ndarray:
    ops = list(ops)
    if not ops:
        raise ValueError("tensor_all needs at least one factor")
    check_dim(int(np.prod([np.shape(o)[0] for o in ops])))
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def partial_trace_ancilla(m, dimK: int, dimH: int) -> np.ndarray:
    """Trace out the left (ancilla) factor of an operator on ``K (x) H``.

    ``result[h, h'] = sum_k m[k*dimH + h, k*dimH + h']``.
    """
    m = np.asarray(m)
    if m.shape != (dimK * dimH, dimK * dimH):
        raise DimensionError(
            f"expected a {dimK * dimH}x{dimK * dimH} operator for "
            f"dimK={dimK}, dimH={dimH}; got shape {m.shape}"
        )
    return np.einsum("kikj->ij", m.reshape(dimK, dimH, dimK, dimH))


def partial_trace_system(m, dimK: int, dimH: int) -> np.ndarray:
    """Trace out the right factor, leaving the ancilla marginal."""
    m = np.asarray(m)
    if m.shape != (dimK * dimH, dimK * dimH):
        raise DimensionError(
            f"expected a {dimK * dimH}x{dimK * dimH} operator for "
            f"dimK={dimK}, dimH={dimH}; got shape {m.shape}"
        )
    return np.einsum("ihjh->ij", m.reshape(dimK, dimH, dimK, dimH))


def spectral_norm(a) -> float:
    """Largest singular value, from the top eigenvalue of ``a^dagger a``."""
    a = np.asarray(a, dtype=complex)
    if not a.any():
        return 0.0
    gram = dagger(a) @ a
    top = np.linalg.eigvalsh(gram)[-1]
    return float(np.sqrt(max(top, 0.0)))


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"commutator of {a.shape} and {b.shape}")
    return a @ b - b @ a


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return _norm_at_most(dagger(u) @ u - np.eye(u.shape[0]), tol)


def is_hermitian(a, tol: float = 1e-10) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return _norm_at_most(a - dagger(a), tol)


def _norm_at_most(x: np.ndarray, tol: float) -> bool:
    # Frobenius >= spectral, so a small Frobenius norm settles it cheaply.
    if np.linalg.norm(x) <= tol:
        return True
    return spectral_norm(x) <= tol


def is_projection(q, tol: float = 1e-10) -> bool:
    q = np.asarray(q, dtype=complex)
    return is_hermitian(q, tol) and _norm_at_most(q @ q - q, tol)


def trace_product(a, b) -> complex:
    """``tr(a @ b)`` in O(d^2) without forming the product."""
    return complex(np.einsum("ij,ji->", a, b))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, norm: float | None = None) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + dagger(g)) / 2
    if norm is not None:
        h = h * (norm / spectral_norm(h))
    return h
