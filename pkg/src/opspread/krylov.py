"""Krylov-subspace machinery for operator growth.

Builds the Liouvillian superoperator L = [H, .], runs the Lanczos recursion
with full (twice-repeated) Gram-Schmidt re-orthogonalization, and evaluates
the operator distribution over the Krylov basis: amplitudes phi_k(t),
complexity C_K(t) and entropy S_K(t).  A brute-force span-rank oracle over
vectorized operators provides an independent check on the subspace
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import numerical_rank, RANK_REL_TOL
from .models import Observable
from .opspace import Superoperator, is_hermitian, vec

#: b_k below this multiple of b_1 terminates the recursion.
ZERO_TOL_REL = 1e-8

#: Deep termination threshold (relative to b_1) that carries the recursion
#: through near-breakdowns of the coefficient sequence into the regime where
#: rounding noise re-populates every reachable direction and the dimension
#: saturates at d^2 - d + 1.  Sits between the near-breakdown dips
#: (>= ~5e-16 relative) and the terminal orthogonalization floor
#: (~2e-17 relative) for chains up to L = 5.
SATURATION_ZERO_TOL = 5e-17


def liouvillian(H: np.ndarray) -> Superoperator:
    """L = [H, .] as a matrix on row-major vectorized operators.

    vec(HX - XH) = (H kron I - I kron H^T) vec(X); Hermitian whenever H is.
    """
    H = np.asarray(H)
    if not is_hermitian(H):
        raise ValueError("Liouvillian generator must be Hermitian")
    d = H.shape[0]
    eye = np.eye(d)
    return Superoperator(np.kron(H, eye) - np.kron(eye, H.T))


@dataclass(eq=False)
class KrylovData:
    """Orthonormal Krylov elements (rows, vectorized) and Lanczos b_k."""

    basis: np.ndarray  # (K, d^2) complex
    lanczos_b: np.ndarray  # (K - 1,) positive coefficients

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]


def lanczos_fo(
    liou: Superoperator,
    observable: Observable,
    zero_tol: float = ZERO_TOL_REL,
) -> KrylovData:
    """Lanczos recursion with full re-orthogonalization.

    Each new element B_k = L Q_{k-1} is orthogonalized against all previous
    Krylov elements, twice, before normalization; the recursion stops at the
    first b_k at or below ``zero_tol`` relative to b_1.  Lowering zero_tol
    below ~1e-15 pushes the recursion through near-breakdowns into the
    roundoff-regularized regime where the span saturates at d^2 - d + 1.
    """
    lmat = liou.matrix
    d2 = lmat.shape[0]
    q0 = vec(observable.matrix).astype(np.complex128)
    norm0 = np.linalg.norm(q0)
    if norm0 == 0.0:
        raise ValueError("initial operator has zero norm")
    qmat = np.empty((d2, d2), dtype=np.complex128)
    qmat[0] = q0 / norm0
    bs: list[float] = []
    # absolute floor for the very first step only: detects [H, O] = 0,
    # where there is no b_1 yet to compare against
    abs_floor = 1e-12 * max(1.0, np.linalg.norm(lmat) / np.sqrt(d2))
    k = 1
    while k < d2:
        b_vec = lmat @ qmat[k - 1]
        prev = qmat[:k]
        for _ in range(2):
            b_vec -= prev.T @ (prev.conj() @ b_vec)
        b = float(np.linalg.norm(b_vec))
        threshold = zero_tol * bs[0] if bs else abs_floor
        if b <= threshold:
            break
        bs.append(b)
        qmat[k] = b_vec / b
        k += 1
    else:
        raise RuntimeError("Lanczos recursion failed to terminate within d^2 steps")
    return KrylovData(basis=qmat[:k].copy(), lanczos_b=np.array(bs))


@dataclass(eq=False)
class KrylovProfile:
    """Operator distribution over the Krylov basis at sampled times."""

    times: np.ndarray
    amplitudes: np.ndarray  # (T, K) real phi_k(t)
    complexity: np.ndarray  # C_K(t)
    entropy: np.ndarray  # S_K(t), nats


def krylov_profile(
    H: np.ndarray,
    observable: Observable,
    data: KrylovData,
    times: np.ndarray,
) -> KrylovProfile:
    """Amplitudes phi_k(t) = i^{-k} <Q_k | O(t)> under exact evolution.

    O(t) = e^{iHt} O e^{-iHt} is computed from the eigendecomposition of H;
    the i^{-k} phase renders the amplitudes real (residue checked).
    """
    times = np.asarray(times, dtype=float)
    evals, evecs = np.linalg.eigh(H)
    o_eig = evecs.conj().T @ observable.matrix @ evecs
    norm0 = np.linalg.norm(observable.matrix)
    K = data.dimension
    phase = (-1j) ** np.arange(K)
    amps = np.empty((len(times), K))
    for i, t in enumerate(times):
        ph = np.exp(1j * evals * t)
        o_t = evecs @ (o_eig * np.outer(ph, ph.conj())) @ evecs.conj().T
        raw = phase * (data.basis.conj() @ vec(o_t)) / norm0
        if np.max(np.abs(raw.imag)) > 1e-8:
            raise ValueError(
                f"amplitude imaginary residue {np.max(np.abs(raw.imag)):.2e} at t={t}"
            )
        amps[i] = raw.real
    weights = amps**2
    k_idx = np.arange(K)
    complexity = weights @ k_idx
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.where(weights > 0, np.log(np.where(weights > 0, weights, 1.0)), 0.0)
    entropy = -np.sum(weights * logw, axis=1)
    return KrylovProfile(
        times=times, amplitudes=amps, complexity=complexity, entropy=entropy
    )


def chain_profile(data: KrylovData, times: np.ndarray) -> KrylovProfile:
    """Amplitudes from the hopping chain defined by the b_k alone.

    In the Krylov basis the evolution reduces to phi' = -A phi with A real
    antisymmetric tridiagonal (A_{k,k+1} = b_{k+1}), so the amplitudes stay
    real and normalized by construction.  Agrees with ``krylov_profile``
    whenever the basis spans the full invariant subspace, and remains
    well-defined when rounding noise has pushed the recursion past it.
    """
    times = np.asarray(times, dtype=float)
    K = data.dimension
    herm = np.zeros((K, K), dtype=complex)  # i A is Hermitian
    idx = np.arange(K - 1)
    herm[idx, idx + 1] = 1j * data.lanczos_b
    herm[idx + 1, idx] = -1j * data.lanczos_b
    evals, evecs = np.linalg.eigh(herm)
    start = evecs.conj().T[:, 0]  # phi(0) = e_0 in the eigenframe
    amps = np.real((np.exp(1j * np.outer(times, evals)) * start) @ evecs.T)
    weights = amps**2
    complexity = weights @ np.arange(K)
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.where(weights > 0, np.log(np.where(weights > 0, weights, 1.0)), 0.0)
    entropy = -np.sum(weights * logw, axis=1)
    return KrylovProfile(
        times=times, amplitudes=amps, complexity=complexity, entropy=entropy
    )


def krylov_complexity(profile: KrylovProfile) -> np.ndarray:
    """C_K(t) = sum_k k |phi_k(t)|^2."""
    return profile.complexity


def krylov_entropy(profile: KrylovProfile) -> np.ndarray:
    """S_K(t) = -sum_k |phi_k|^2 ln |phi_k|^2."""
    return profile.entropy


def span_rank_oracle(vectors, rel_tol: float = RANK_REL_TOL) -> int:
    """Numerical rank of the Gram matrix of a list of vectorized operators.

    Brute-force oracle for the Krylov dimension and the covariance-rank
    saturation; independent of the Lanczos recursion.  Vectors are
    normalized first so that the growth of ||L^k O|| cannot mask genuine
    directions behind the relative eigenvalue threshold.
    """
    rows = []
    for v in vectors:
        row = vec(np.asarray(v))
        norm = np.linalg.norm(row)
        if norm > 0.0:
            rows.append(row / norm)
    if not rows:
        return 0
    mat = np.array(rows)
    gram = mat.conj() @ mat.T
    w = np.linalg.eigvalsh(gram).real
    return numerical_rank(w, rel_tol)


def liouvillian_orbit(liou: Superoperator, observable: Observable, count: int):
    """Normalized powers [O, L O, ..., L^{count-1} O] for the span oracle.

    Each power is rescaled to unit norm before the next application of L;
    the span is unchanged and intermediate overflow is impossible.
    """
    v = vec(observable.matrix).astype(np.complex128)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("initial operator has zero norm")
    v = v / norm
    out = [v]
    for _ in range(count - 1):
        v = liou.matrix @ v
        norm = np.linalg.norm(v)
        if norm == 0.0:
            break
        v = v / norm
        out.append(v)
    return out


def default_time_grid(d: int, n_early: int = 40, n_late: int = 60) -> np.ndarray:
    """Geometric grid at early times, then linear out to t = 10 d."""
    early = np.geomspace(1e-2, 1.0, n_early, endpoint=False)
    late = np.linspace(1.0, 10.0 * d, n_late)
    return np.concatenate([[0.0], early, late])
