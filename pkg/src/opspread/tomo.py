"""State reconstruction from a continuous weak-measurement record.

Pipeline: simulate the record M_n = Tr(O_n rho_0) + W_n, form the
maximum-likelihood Bloch estimate through the pseudoinverse of C^-1, then
project onto the physical (positive semidefinite) set by minimizing the
covariance-weighted distance with an accelerated projected-gradient scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import InverseCovariance, ObservableSeries, numerical_rank, RANK_REL_TOL
from .opspace import OperatorBasis, density_from_bloch

#: Fraction of the mean eigenvalue used to regularize the projection weight.
EPSILON_FRACTION = 1e-6


@dataclass(eq=False)
class MeasurementRecord:
    values: np.ndarray
    noise_sigma: float
    rng_seed: object = None


@dataclass(eq=False)
class ReconstructionResult:
    """ML estimate, its physical projection, and (optional) truth scores."""

    r_ml: np.ndarray
    r_bar: np.ndarray
    objective: float
    converged: bool
    iterations: int
    fidelity: float | None = None
    hs_distance: float | None = None


def sample_haar_state(d: int, rng_seed) -> np.ndarray:
    """Unit-norm pure state drawn from the Haar measure on C^d."""
    if d < 2:
        raise ValueError(f"Hilbert dimension must be >= 2, got {d}")
    rng = (rng_seed if isinstance(rng_seed, np.random.Generator)
           else np.random.default_rng(rng_seed))
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)


def measurement_record(
    series: ObservableSeries,
    rho0: np.ndarray,
    sigma: float,
    rng_seed,
) -> MeasurementRecord:
    """M_n = Tr(O_n rho_0) + W_n with i.i.d. Gaussian W_n of spread sigma."""
    if sigma < 0:
        raise ValueError(f"noise spread must be >= 0, got {sigma}")
    values = series.expectations(rho0)
    if sigma > 0:
        rng = (rng_seed if isinstance(rng_seed, np.random.Generator)
               else np.random.default_rng(rng_seed))
        values = values + sigma * rng.standard_normal(values.shape)
    return MeasurementRecord(values=values, noise_sigma=sigma, rng_seed=rng_seed)


def ml_estimate(
    series: ObservableSeries,
    record: MeasurementRecord,
    invcov: InverseCovariance | None = None,
    rank_rel_tol: float = RANK_REL_TOL,
) -> np.ndarray:
    """Least-squares Bloch estimate r_ML = C Otilde^T M.

    C is the Moore-Penrose pseudoinverse of C^-1: components of r_ML along
    eigenvectors below the rank threshold are zero.
    """
    n = len(record.values)
    if n != series.n_records and invcov is None:
        invcov = inv_covariance_slice(series, n)
    if invcov is None:
        from .evolve import inv_covariance

        invcov = inv_covariance(series)
    rows = series.measurement_matrix[:n]
    b = rows.T @ (np.asarray(record.values) - series.trace_over_d)
    w, v = invcov.eigenvalues, invcov.eigenvectors
    rank = numerical_rank(w, rank_rel_tol)
    if rank == 0:
        return np.zeros(series.measurement_matrix.shape[1])
    vk = v[:, :rank]
    return vk @ ((vk.T @ b) / w[:rank])


def inv_covariance_slice(series: ObservableSeries, n: int) -> InverseCovariance:
    from .evolve import inv_covariance

    return inv_covariance(series, n)


def default_epsilon(invcov: InverseCovariance) -> float:
    """Regularization strength 1e-6 Tr(C^-1)/(d^2-1)."""
    return EPSILON_FRACTION * invcov.trace / invcov.matrix.shape[0]


def _project_simplex(w: np.ndarray) -> np.ndarray:
    """Euclidean projection of eigenvalues onto {w >= 0, sum w = 1}."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(w) + 1)
    feasible = np.nonzero(u * k > css - 1.0)[0]
    j = feasible[-1]
    theta = (css[j] - 1.0) / (j + 1)
    return np.maximum(w - theta, 0.0)


def project_physical(r: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Closest (Hilbert-Schmidt) physical Bloch vector: eigenvalue simplex
    projection of the reconstructed matrix, trace 1 restored by construction."""
    rho = density_from_bloch(r, basis)
    w, v = np.linalg.eigh(rho)
    w2 = _project_simplex(w)
    rho2 = (v * w2) @ v.conj().T
    return basis.coords(rho2)


def positivity_projection(
    r_ml: np.ndarray,
    invcov: InverseCovariance,
    basis: OperatorBasis,
    epsilon: float | None = None,
    max_iter: int = 5000,
    tol: float = 1e-10,
    start: np.ndarray | None = None,
) -> ReconstructionResult:
    """Minimize (r_ML - r)^T W (r_ML - r) over physical r.

    W = C^-1 + eps*I (strictly convex, so the minimizer is unique).  Uses
    FISTA with monotone restarts; the feasible-set projection is exact
    (eigenvalue simplex projection).  ``start`` allows an independent
    restart as a convergence certificate.
    """
    if epsilon is None:
        epsilon = default_epsilon(invcov)
    if epsilon <= 0:
        raise ValueError(f"regularization must be positive, got {epsilon}")
    cinv = invcov.matrix
    lip = 2.0 * (float(invcov.eigenvalues[0]) + epsilon)

    def objective(r):
        dr = r - r_ml
        return float(dr @ (cinv @ dr) + epsilon * (dr @ dr))

    def gradient(r):
        dr = r - r_ml
        return 2.0 * (cinv @ dr + epsilon * dr)

    x = project_physical(r_ml if start is None else np.asarray(start), basis)
    fx = objective(x)
    scale = max(fx, epsilon * (float(r_ml @ r_ml) + 1.0))
    y, t_mom = x, 1.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        x_new = project_physical(y - gradient(y) / lip, basis)
        f_new = objective(x_new)
        if f_new > fx:  # momentum overshoot: restart from the best iterate
            y, t_mom = x, 1.0
            x_new = project_physical(y - gradient(y) / lip, basis)
            f_new = objective(x_new)
        if abs(fx - f_new) <= tol * scale and f_new <= fx + tol * scale:
            x, fx = x_new, min(fx, f_new)
            converged = True
            break
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
        y = x_new + ((t_mom - 1.0) / t_new) * (x_new - x)
        x, fx, t_mom = x_new, f_new, t_new
    return ReconstructionResult(
        r_ml=np.asarray(r_ml),
        r_bar=x,
        objective=fx,
        converged=converged,
        iterations=iterations,
    )


def fidelity(rho_bar: np.ndarray, psi0: np.ndarray) -> float:
    """F = <psi0| rho_bar |psi0>."""
    val = np.vdot(psi0, rho_bar @ psi0)
    if abs(val.imag) > 1e-12:
        raise ValueError(f"fidelity has imaginary residue {val.imag}")
    return float(val.real)


def reconstruct(
    series: ObservableSeries,
    record: MeasurementRecord,
    psi0: np.ndarray | None = None,
    invcov: InverseCovariance | None = None,
    epsilon: float | None = None,
    rank_rel_tol: float = RANK_REL_TOL,
    max_iter: int = 5000,
) -> ReconstructionResult:
    """Full pipeline: ML estimate, physical projection, optional scoring."""
    if invcov is None:
        invcov = inv_covariance_slice(series, len(record.values))
    r_ml = ml_estimate(series, record, invcov=invcov, rank_rel_tol=rank_rel_tol)
    result = positivity_projection(
        r_ml, invcov, series.basis, epsilon=epsilon, max_iter=max_iter
    )
    if psi0 is not None:
        from .metrics import hs_distance

        rho_bar = density_from_bloch(result.r_bar, series.basis)
        result.fidelity = fidelity(rho_bar, psi0)
        result.hs_distance = hs_distance(np.outer(psi0, psi0.conj()), rho_bar)
    return result
