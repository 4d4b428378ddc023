"""Operator-space algebra for qudit density matrices.

Provides the orthonormal traceless Hermitian basis (generalized Gell-Mann
matrices), Bloch-vector <-> density-matrix maps, Hilbert-Schmidt inner
products, row-major vectorization, and adjoint-action superoperators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-10


class InvalidDimensionError(ValueError):
    """Hilbert-space dimension outside the supported range."""


class InvalidStateError(ValueError):
    """Input matrix is not a valid density matrix."""


class InvalidUnitaryError(ValueError):
    """Input matrix is not unitary to tolerance."""


def vec(op: np.ndarray) -> np.ndarray:
    """Row-major vectorization of a d x d operator."""
    return np.asarray(op).ravel()


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(d, d)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b)."""
    return complex(np.vdot(a, b))


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    d = u.shape[0]
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(d))) <= tol)


@dataclass(eq=False)
class OperatorBasis:
    """Orthonormal traceless Hermitian basis {E_alpha} of su(d).

    Elements are generalized Gell-Mann matrices in a fixed deterministic
    order: d(d-1)/2 symmetric pair operators, then d(d-1)/2 antisymmetric
    pair operators (pairs in lexicographic (j, k) order, j < k), then the
    d-1 diagonal operators.  Each element is normalized to Tr(E^2) = 1.
    """

    dim_hilbert: int
    elements: np.ndarray  # shape (d^2 - 1, d, d)
    _triu: tuple = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return self.dim_hilbert * self.dim_hilbert - 1

    def coords(self, op: np.ndarray) -> np.ndarray:
        """Coordinates Tr(op E_alpha) of the traceless part of a Hermitian op.

        Uses the closed form for the Gell-Mann construction; O(d^2) per call
        instead of contracting against every basis element.
        """
        d = self.dim_hilbert
        ju, ku = self._triu
        off = op[ju, ku]
        sym = np.sqrt(2.0) * off.real
        antisym = -np.sqrt(2.0) * off.imag
        diag = np.real(np.diagonal(op))
        l = np.arange(1, d)
        diag_coords = (np.cumsum(diag)[:-1] - l * diag[1:]) / np.sqrt(l * (l + 1))
        return np.concatenate([sym, antisym, diag_coords])

    def matrix(self, coords: np.ndarray) -> np.ndarray:
        """Sum_alpha coords_alpha E_alpha (traceless Hermitian)."""
        if coords.shape != (self.size,):
            raise InvalidDimensionError(
                f"expected {self.size} coordinates, got {coords.shape}"
            )
        return np.tensordot(coords, self.elements, axes=1)


def build_basis(d: int) -> OperatorBasis:
    """Generalized Gell-Mann basis of d^2 - 1 traceless Hermitian matrices."""
    if d < 2:
        raise InvalidDimensionError(f"Hilbert dimension must be >= 2, got {d}")
    elements = np.zeros((d * d - 1, d, d), dtype=np.complex128)
    idx = 0
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        elements[idx, j, k] = inv_sqrt2
        elements[idx, k, j] = inv_sqrt2
        idx += 1
    for j, k in pairs:
        elements[idx, j, k] = -1j * inv_sqrt2
        elements[idx, k, j] = 1j * inv_sqrt2
        idx += 1
    for l in range(1, d):
        norm = 1.0 / np.sqrt(l * (l + 1))
        for m in range(l):
            elements[idx, m, m] = norm
        elements[idx, l, l] = -l * norm
        idx += 1
    ju, ku = np.triu_indices(d, 1)
    return OperatorBasis(dim_hilbert=d, elements=elements, _triu=(ju, ku))


def bloch_from_density(rho: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Bloch vector r_alpha = Tr(rho E_alpha) of a unit-trace Hermitian rho."""
    rho = np.asarray(rho)
    if rho.shape != (basis.dim_hilbert,) * 2:
        raise InvalidStateError(f"state has wrong shape {rho.shape}")
    if not is_hermitian(rho):
        raise InvalidStateError("state is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise InvalidStateError(f"state trace {np.trace(rho)} != 1")
    return basis.coords(rho)


def density_from_bloch(r: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """I/d + sum_alpha r_alpha E_alpha.

    Hermitian with unit trace by construction; positivity is NOT guaranteed
    (callers needing a physical state must project separately).
    """
    d = basis.dim_hilbert
    return np.eye(d) / d + basis.matrix(np.asarray(r, dtype=float))


@dataclass(eq=False)
class Superoperator:
    """Dense d^2 x d^2 matrix acting on row-major vectorized operators."""

    matrix: np.ndarray

    @property
    def dim_hilbert(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, op: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(op))

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.matrix @ other.matrix)


def adjoint_superoperator(u: np.ndarray) -> Superoperator:
    """Superoperator of the adjoint action O -> U^dag O U.

    With row-major vectorization vec(A X B) = (A kron B^T) vec(X), so the
    matrix is U^dag kron U^T.
    """
    u = np.asarray(u)
    if not is_unitary(u):
        raise InvalidUnitaryError("input matrix is not unitary to 1e-10")
    return Superoperator(np.kron(u.conj().T, u.T))
