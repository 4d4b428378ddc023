import numpy as np
import pytest

from opspread import evolve, metrics, models


def invcov_from_spectrum(w, n_records=1):
    return evolve.InverseCovariance(matrix=np.diag(np.asarray(w, float)),
                                    n_records=n_records)


def test_entropy_rank_one_is_zero():
    ic = invcov_from_spectrum([2.5] + [0.0] * 14)
    assert metrics.shannon_entropy(ic) == pytest.approx(0.0, abs=1e-14)


def test_entropy_uniform_spectrum():
    ic = invcov_from_spectrum([0.7] * 6 + [0.0] * 4)
    assert metrics.shannon_entropy(ic) == pytest.approx(np.log(6), abs=1e-12)


def test_entropy_of_empty_spectrum_raises():
    with pytest.raises(metrics.UndefinedEntropyError):
        metrics.shannon_entropy(invcov_from_spectrum(np.zeros(3)))


def test_fisher_zero_records():
    m = 15
    ic = invcov_from_spectrum(np.zeros(m), n_records=0)
    eps = 1e-4
    assert metrics.fisher_information(ic, eps) == pytest.approx(eps / m, rel=1e-12)


def test_fisher_uniform_closed_form():
    m, lam, eps = 8, 0.3, 1e-5
    ic = invcov_from_spectrum([lam] * m)
    assert metrics.fisher_information(ic, eps) == pytest.approx((lam + eps) / m,
                                                               rel=1e-12)
    with pytest.raises(ValueError):
        metrics.fisher_information(ic, 0.0)


def test_covariance_rank_identity_evolution():
    obs = models.site_observable("y", 1, 2)
    series = evolve.heisenberg_series(np.eye(4), obs, 25)
    for n in (1, 10, 25):
        assert metrics.covariance_rank(evolve.inv_covariance(series, n)) == 1


def test_amgm_equality_for_uniform_spectrum():
    ic = invcov_from_spectrum([1.3] * 8)
    diag = metrics.mutual_info_diagnostics(ic, 1e-9)
    assert abs(diag.log_inv_volume - diag.uniform_bound) <= 1e-6


def test_amgm_strict_for_rank_deficient_spectrum():
    ic = invcov_from_spectrum([5.0] + [0.0] * 7)
    diag = metrics.mutual_info_diagnostics(ic, 1e-6)
    assert diag.log_inv_volume < diag.uniform_bound - 1.0


def test_mutual_info_trace_field():
    # trace of the regularized spectrum is n ||O||^2 + (d^2-1) eps
    L = 2
    u = models.tki_floquet(models.IsingParams(L=L, J=1.0, h_x=1.4, h_z=1.4))
    obs = models.site_observable("y", 1, L)
    series = evolve.heisenberg_series(u, obs, 50)
    eps = 1e-5
    for n in (3, 25, 50):
        ic = evolve.inv_covariance(series, n)
        diag = metrics.mutual_info_diagnostics(ic, eps)
        expected = n * 1.0 + 15 * eps  # ||s1y||^2 = 1
        assert abs(diag.trace - expected) / expected <= 1e-8
        assert diag.log_inv_volume <= diag.uniform_bound + 1e-9


def test_metrics_invariant_under_basis_rotation():
    # rotating the operator basis conjugates C^-1 by an orthogonal matrix and
    # must leave every reported quantity unchanged
    u = models.tki_floquet(models.IsingParams(L=2, J=1.0, h_x=1.4, h_z=1.4))
    obs = models.site_observable("y", 1, 2)
    series = evolve.heisenberg_series(u, obs, 60)
    ic = evolve.inv_covariance(series)
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.standard_normal((15, 15)))
    ic_rot = evolve.InverseCovariance(matrix=q @ ic.matrix @ q.T,
                                      n_records=ic.n_records)
    eps = 1e-6
    assert metrics.covariance_rank(ic_rot) == metrics.covariance_rank(ic)
    assert metrics.shannon_entropy(ic_rot) == pytest.approx(
        metrics.shannon_entropy(ic), rel=1e-9)
    assert metrics.fisher_information(ic_rot, eps) == pytest.approx(
        metrics.fisher_information(ic, eps), rel=1e-9)
    assert ic_rot.trace == pytest.approx(ic.trace, rel=1e-12)


def test_entropy_range_bound():
    u = models.tki_floquet(models.IsingParams(L=3, J=1.0, h_x=1.4, h_z=1.4))
    obs = models.site_observable("y", 1, 3)
    series = evolve.heisenberg_series(u, obs, 128)
    s = metrics.shannon_entropy(evolve.inv_covariance(series))
    assert 0.0 <= s <= np.log(63)
