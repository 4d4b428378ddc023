"""Information-theoretic quantifiers of operator spreading.

All quantities derive from the eigenvalue spectrum of the inverse
covariance matrix: Shannon entropy of the normalized spectrum, regularized
Fisher information, numerical rank, Hilbert-Schmidt distance, and the
mutual-information volume bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import InverseCovariance, numerical_rank, RANK_REL_TOL


class UndefinedEntropyError(ValueError):
    """Spectrum has no weight to normalize."""


def shannon_entropy(invcov: InverseCovariance) -> float:
    """-sum_i lambda_i ln lambda_i of the trace-normalized spectrum (nats)."""
    w = np.clip(invcov.eigenvalues, 0.0, None)
    total = w.sum()
    if total <= 0.0:
        raise UndefinedEntropyError("all eigenvalues are zero")
    p = w / total
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)))


def fisher_information(invcov: InverseCovariance, epsilon: float) -> float:
    """J = 1 / Tr[(C^-1 + eps I)^-1], from the eigenvalue spectrum."""
    if epsilon <= 0:
        raise ValueError(f"regularization must be positive, got {epsilon}")
    w = np.clip(invcov.eigenvalues, 0.0, None)
    return float(1.0 / np.sum(1.0 / (w + epsilon)))


def covariance_rank(invcov: InverseCovariance, rel_tol: float = RANK_REL_TOL) -> int:
    """Count of eigenvalues above the relative threshold."""
    return numerical_rank(invcov.eigenvalues, rel_tol)


def hs_distance(rho0: np.ndarray, rho_bar: np.ndarray) -> float:
    """Tr[(rho0 - rho_bar)^2]; equals the squared Bloch-coordinate error."""
    delta = rho0 - rho_bar
    return float(np.trace(delta @ delta).real)


@dataclass(frozen=True)
class MutualInfoDiagnostics:
    """log(1/V) of the likelihood error ellipsoid and its AM-GM ceiling."""

    log_inv_volume: float
    trace: float
    uniform_bound: float


def mutual_info_diagnostics(
    invcov: InverseCovariance, epsilon: float
) -> MutualInfoDiagnostics:
    """Volume-based information gain for the regularized spectrum.

    log(1/V) = (1/2) sum_i ln(lambda_i + eps) is bounded by the uniform
    spectrum value ((d^2-1)/2) ln(Tr/(d^2-1)); equality iff all eigenvalues
    coincide.
    """
    if epsilon <= 0:
        raise ValueError(f"regularization must be positive, got {epsilon}")
    w = np.clip(invcov.eigenvalues, 0.0, None) + epsilon
    m = w.size
    log_inv_volume = float(0.5 * np.sum(np.log(w)))
    trace = float(np.sum(w))
    uniform_bound = float(0.5 * m * np.log(trace / m))
    return MutualInfoDiagnostics(
        log_inv_volume=log_inv_volume, trace=trace, uniform_bound=uniform_bound
    )
