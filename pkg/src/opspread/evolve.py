"""Heisenberg time series of an observable and the inverse covariance matrix.

Each record n carries the coordinates of O_n = U^dag^n O U^n in the fixed
operator basis; stacking them gives the measurement matrix, whose Gram
matrix is the inverse covariance C^-1 of the tomography likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import Observable
from .opspace import OperatorBasis, build_basis, is_unitary, InvalidUnitaryError

RANK_REL_TOL = 1e-10
#: Records beyond this multiple of d^2 are refused (runaway-horizon guard).
MAX_STEPS_FACTOR = 10


@dataclass(eq=False)
class ObservableSeries:
    """Heisenberg-evolved observables O_0..O_{N-1} and their Bloch rows."""

    basis: OperatorBasis
    observable: Observable
    measurement_matrix: np.ndarray  # (N, d^2 - 1), row n = coords of O_n
    trace_over_d: float  # Tr(O)/d, the identity component of every record
    operators: list | None = None  # kept only when requested

    @property
    def n_records(self) -> int:
        return self.measurement_matrix.shape[0]

    @property
    def dim_hilbert(self) -> int:
        return self.basis.dim_hilbert

    def row_norms_squared(self) -> np.ndarray:
        return np.einsum("na,na->n", self.measurement_matrix,
                         self.measurement_matrix)

    def expectations(self, rho0: np.ndarray) -> np.ndarray:
        """Noiseless record Tr(O_n rho0) for every n."""
        s = self.basis.coords(rho0)
        return self.measurement_matrix @ s + self.trace_over_d


def heisenberg_series(
    u: np.ndarray,
    observable: Observable,
    n_steps: int,
    basis: OperatorBasis | None = None,
    keep_operators: bool = False,
    max_steps: int | None = None,
) -> ObservableSeries:
    """Iteratively conjugate O by U and collect Bloch rows for n = 0..N-1.

    The n = 0 record is the unevolved observable.  Hermiticity is restored
    after each conjugation to stop roundoff drift from accumulating.
    """
    if n_steps < 1:
        raise ValueError(f"need at least one record, got n_steps={n_steps}")
    if not is_unitary(u):
        raise InvalidUnitaryError("evolution map is not unitary to 1e-10")
    d = u.shape[0]
    if basis is None:
        basis = build_basis(d)
    if max_steps is None:
        max_steps = MAX_STEPS_FACTOR * d * d
    if n_steps > max_steps:
        raise ValueError(f"n_steps={n_steps} exceeds maximum {max_steps}")

    udag = u.conj().T
    o = np.array(observable.matrix, dtype=np.complex128)
    rows = np.empty((n_steps, d * d - 1))
    kept = [] if keep_operators else None
    for n in range(n_steps):
        rows[n] = basis.coords(o)
        if keep_operators:
            kept.append(o.copy())
        if n + 1 < n_steps:
            o = udag @ o @ u
            o = 0.5 * (o + o.conj().T)
    return ObservableSeries(
        basis=basis,
        observable=observable,
        measurement_matrix=rows,
        trace_over_d=float(np.trace(observable.matrix).real) / d,
        operators=kept,
    )


@dataclass(eq=False)
class InverseCovariance:
    """C^-1 = Otilde^T Otilde with a cached eigendecomposition."""

    matrix: np.ndarray
    n_records: int
    _eig: tuple | None = field(default=None, repr=False)

    def _decompose(self):
        if self._eig is None:
            w, v = np.linalg.eigh(self.matrix)
            order = np.argsort(w)[::-1]
            self._eig = (w[order], v[:, order])
        return self._eig

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return self._decompose()[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        """Orthonormal eigenvector columns, aligned with ``eigenvalues``."""
        return self._decompose()[1]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def extended(self, rows: np.ndarray) -> "InverseCovariance":
        """New matrix with extra measurement rows appended."""
        rows = np.atleast_2d(rows)
        return InverseCovariance(
            matrix=self.matrix + rows.T @ rows,
            n_records=self.n_records + rows.shape[0],
        )


def inv_covariance(series: ObservableSeries, n: int | None = None) -> InverseCovariance:
    """Inverse covariance after the first n records (all records by default)."""
    if n is None:
        n = series.n_records
    if not 1 <= n <= series.n_records:
        raise ValueError(f"record count {n} outside 1..{series.n_records}")
    rows = series.measurement_matrix[:n]
    return InverseCovariance(matrix=rows.T @ rows, n_records=n)


def numerical_rank(eigenvalues: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    """Eigenvalues above rel_tol times the largest count toward the rank."""
    w = np.asarray(eigenvalues)
    top = float(np.max(w, initial=0.0))
    if top <= 0.0:
        return 0
    return int(np.sum(w > rel_tol * top))
