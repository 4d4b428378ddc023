"""Experiment orchestration: sweeps, ensembles, CSV persistence.

One config expands into one job per chaoticity value (or RMT sample).  Each
job generates the Heisenberg record, evaluates the covariance-spectrum
metrics on the requested steps, reconstructs an ensemble of Haar-random
states, and optionally runs the Krylov pipeline.  All randomness derives
from the master seed through SeedSequence spawning, so outputs are
byte-identical across runs and thread counts.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, RunManifest
from .evolve import InverseCovariance, heisenberg_series, ObservableSeries
from .krylov import default_time_grid, krylov_profile, lanczos_fo, liouvillian
from .metrics import (
    covariance_rank,
    fisher_information,
    mutual_info_diagnostics,
    shannon_entropy,
)
from .models import (
    IsingParams,
    Observable,
    XXZParams,
    coe_sample,
    collective_observable,
    goe_sample,
    site_observable,
    sum_site_observable,
    ti_unitary,
    tki_floquet,
    unitary_from_hamiltonian,
    xxz_hamiltonian,
    ti_hamiltonian,
)
from .opspace import build_basis
from .tomo import (
    MeasurementRecord,
    default_epsilon,
    reconstruct,
    sample_haar_state,
)

CSV_COLUMNS = (
    "n,model,L,chaos_param,mean_fidelity,fidelity_stderr,"
    "S_c,J,R,trace_invcov,log_inv_volume"
)


def _fmt(x: float) -> str:
    if x == 0.0:
        x = 0.0  # avoid "-0" rows for signed zeros
    return f"{x:.17g}"


def build_observable(spec: str, L: int) -> Observable:
    spec = spec.strip()
    if spec in ("Sx", "Sy", "Sz"):
        return collective_observable(spec[1], L)
    terms = []
    for term in spec.split("+"):
        term = term.strip()
        terms.append((term[-1], int(term[1:-1])))
    if len(terms) == 1:
        axis, site = terms[0]
        return site_observable(axis, site, L)
    return sum_site_observable(terms, L)


@dataclass(eq=False)
class Job:
    """One sweep point: a fixed dynamics plus its chaoticity label."""

    chaos_param: float
    unitary: np.ndarray
    hamiltonian: np.ndarray | None
    label: str


def expand_jobs(cfg: ExperimentConfig, rng_streams) -> list[Job]:
    jobs = []
    for value, stream in zip(cfg.chaos_values(), rng_streams):
        rng = np.random.default_rng(stream)
        if cfg.model == "tki":
            p = IsingParams(L=cfg.L, J=cfg.J, h_x=cfg.h_x, h_z=value, kicked=True)
            u, h = tki_floquet(p), None
        elif cfg.model == "ti":
            p = IsingParams(L=cfg.L, J=cfg.J, h_x=cfg.h_x, h_z=value, kicked=False)
            h = ti_hamiltonian(p)
            u = ti_unitary(p, cfg.dt)
        elif cfg.model == "xxz":
            p = XXZParams(
                L=cfg.L,
                J_xy=cfg.J_xy,
                J_zz=cfg.J_zz,
                g=value,
                impurity_site=cfg.impurity_site,
                impurity_axis=cfg.impurity_axis,
            )
            h = xxz_hamiltonian(p)
            u = unitary_from_hamiltonian(h, cfg.dt)
        elif cfg.model == "coe":
            u, h = coe_sample(cfg.L, rng), None
        elif cfg.model == "goe":
            h = goe_sample(cfg.L, rng)
            u = unitary_from_hamiltonian(h, cfg.dt)
        else:
            raise ConfigError(f"unknown model {cfg.model!r}")
        label = f"{cfg.model}_{value:g}"
        jobs.append(Job(chaos_param=float(value), unitary=u, hamiltonian=h, label=label))
    return jobs


def resolve_steps(spec: str, horizon: int, d: int) -> list[int]:
    """Record counts n at which metrics are evaluated.

    'all' is every step; 'auto' keeps every step for small systems and a
    log-then-linear subgrid (plus the final step) once per-step
    eigendecompositions get expensive.
    """
    if spec == "all":
        return list(range(1, horizon + 1))
    if spec == "final":
        return [horizon]
    if spec == "auto":
        if d * d - 1 <= 256:
            return list(range(1, horizon + 1))
        log_part = np.unique(np.geomspace(1, horizon, 48).astype(int))
        lin_part = np.arange(horizon // 8, horizon + 1, max(1, horizon // 16))
        steps = sorted(set(log_part) | set(lin_part) | {horizon})
        return [int(s) for s in steps]
    try:
        steps = sorted({int(tok) for tok in spec.split(",") if tok.strip()})
    except ValueError as exc:
        raise ConfigError(f"bad step list {spec!r}") from exc
    if not steps or steps[0] < 1 or steps[-1] > horizon:
        raise ConfigError(f"steps {spec!r} outside 1..{horizon}")
    return steps


def _member_fidelities(series, psi0, noise, fid_steps, invcovs, epsilon, rank_rel_tol):
    """Reconstruction fidelity for one ensemble member at each record count."""
    rho0 = np.outer(psi0, psi0.conj())
    clean = series.expectations(rho0)
    sigma = 0.0 if noise is None else float(np.std(noise))
    fids = np.empty(len(fid_steps))
    warnings = 0
    for i, n in enumerate(fid_steps):
        values = clean[:n] if noise is None else clean[:n] + noise[:n]
        record = MeasurementRecord(values=values, noise_sigma=sigma)
        result = reconstruct(
            series,
            record,
            psi0=psi0,
            invcov=invcovs[n],
            epsilon=epsilon,
            rank_rel_tol=rank_rel_tol,
        )
        fids[i] = result.fidelity
        if not result.converged:
            warnings += 1
    return fids, warnings


def run_experiment(cfg: ExperimentConfig, out_dir, threads: int | None = None) -> RunManifest:
    """Run every sweep job and persist CSV results plus a JSON manifest."""
    cfg.validate()
    t_start = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = threads or cfg.threads
    d = cfg.dim_hilbert
    basis = build_basis(d)
    observable = build_observable(cfg.observable, cfg.L)
    horizon = cfg.n_records

    master = np.random.SeedSequence(cfg.seed)
    n_jobs = len(cfg.chaos_values())
    job_streams = master.spawn(n_jobs)
    ensemble_stream = master.spawn(1)[0]
    state_seeds = ensemble_stream.spawn(cfg.ensemble_size)
    # one Haar state and one noise stream per member, shared across jobs
    member_streams = [s.spawn(2) for s in state_seeds]
    states = [sample_haar_state(d, np.random.default_rng(a)) for a, _ in member_streams]
    noise_rngs = [np.random.default_rng(b) for _, b in member_streams]

    jobs = expand_jobs(cfg, job_streams)
    eval_steps = resolve_steps(cfg.eval_steps, horizon, d)
    fid_steps = resolve_steps(cfg.fidelity_steps, horizon, d)
    fid_steps = [n for n in fid_steps if n in set(eval_steps)] or [horizon]

    rows = []
    krylov_files: list[str] = []
    warnings = 0
    for job in jobs:
        series = heisenberg_series(
            job.unitary,
            observable,
            horizon + cfg.first_record,
            basis=basis,
            max_steps=max(10 * d * d, horizon) + 1,
        )
        if cfg.first_record:
            series = ObservableSeries(
                basis=basis,
                observable=observable,
                measurement_matrix=series.measurement_matrix[1:],
                trace_over_d=series.trace_over_d,
            )
        invcovs = _cumulative_invcovs(series, eval_steps)
        fid_mean, fid_err, n_warn = _ensemble_fidelity(
            cfg, series, states, noise_rngs, fid_steps, invcovs, threads
        )
        warnings += n_warn
        fid_by_step = dict(zip(fid_steps, zip(fid_mean, fid_err)))
        for n in eval_steps:
            invcov = invcovs[n]
            eps = cfg.epsilon if cfg.epsilon is not None else default_epsilon(invcov)
            diag = mutual_info_diagnostics(invcov, eps)
            mean_f, err_f = fid_by_step.get(n, (float("nan"), float("nan")))
            rows.append(
                (
                    n,
                    cfg.model,
                    cfg.L,
                    job.chaos_param,
                    mean_f,
                    err_f,
                    shannon_entropy(invcov),
                    fisher_information(invcov, eps),
                    covariance_rank(invcov, cfg.rank_rel_tol),
                    invcov.trace,
                    diag.log_inv_volume,
                )
            )
        if cfg.krylov and job.hamiltonian is not None:
            krylov_files += _run_krylov(cfg, job, observable, out_dir)

    results_path = out_dir / "results.csv"
    with results_path.open("w", newline="") as fh:
        fh.write(CSV_COLUMNS + "\n")
        for row in rows:
            n, model, L, chaos, mf, fe, sc, j, r, tr, liv = row
            fh.write(
                f"{n},{model},{L},{_fmt(chaos)},{_fmt(mf)},{_fmt(fe)},"
                f"{_fmt(sc)},{_fmt(j)},{r},{_fmt(tr)},{_fmt(liv)}\n"
            )

    manifest = RunManifest(
        config=_config_dict(cfg),
        version=__version__,
        wall_time_s=time.perf_counter() - t_start,
        files={"results": [results_path.name], "krylov": krylov_files},
        resolved={
            "epsilon": "auto (1e-6 * trace / (d^2-1))"
            if cfg.epsilon is None
            else cfg.epsilon,
            "rank_rel_tol": cfg.rank_rel_tol,
            "zero_tol": cfg.zero_tol,
            "boundary": "free",
            "impurity_convention": (
                "g/2 * sigma_z" if cfg.impurity_axis == "z" else "g/2 * s_y"
            ),
            "first_record": cfg.first_record,
            "eval_steps": eval_steps,
            "fidelity_steps": fid_steps,
            "sigma": cfg.sigma,
            "ensemble_size": cfg.ensemble_size,
        },
        warnings=warnings,
    )
    (out_dir / "manifest.json").write_text(manifest.to_json())
    return manifest


def _config_dict(cfg: ExperimentConfig) -> dict:
    from dataclasses import asdict

    return asdict(cfg)


def _cumulative_invcovs(series, eval_steps) -> dict[int, InverseCovariance]:
    """C^-1 at each requested record count, accumulated incrementally."""
    mm = series.measurement_matrix
    size = mm.shape[1]
    acc = np.zeros((size, size))
    out = {}
    prev = 0
    for n in eval_steps:
        block = mm[prev:n]
        acc += block.T @ block
        out[n] = InverseCovariance(matrix=acc.copy(), n_records=n)
        prev = n
    return out


def _ensemble_fidelity(cfg, series, states, noise_rngs, fid_steps, invcovs, threads):
    noises = []
    for rng in noise_rngs:
        # draw even when sigma == 0 so the stream layout is config-stable
        draw = rng.standard_normal(series.n_records)
        noises.append(cfg.sigma * draw if cfg.sigma > 0 else None)

    def work(i):
        return _member_fidelities(
            series,
            states[i],
            noises[i],
            fid_steps,
            invcovs,
            cfg.epsilon,
            cfg.rank_rel_tol,
        )

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(len(states))))
    else:
        results = [work(i) for i in range(len(states))]
    fids = np.array([r[0] for r in results])  # (members, steps)
    warnings = int(sum(r[1] for r in results))
    mean = fids.mean(axis=0)
    if len(states) > 1:
        err = fids.std(axis=0, ddof=1) / np.sqrt(len(states))
    else:
        err = np.zeros_like(mean)
    return mean, err, warnings


def _run_krylov(cfg, job, observable, out_dir) -> list[str]:
    liou = liouvillian(job.hamiltonian)
    data = lanczos_fo(liou, observable, zero_tol=cfg.zero_tol)
    files = []
    lanczos_path = out_dir / f"lanczos_{job.label}.csv"
    with lanczos_path.open("w", newline="") as fh:
        fh.write("k,b_k\n")
        for k, b in enumerate(data.lanczos_b, start=1):
            fh.write(f"{k},{_fmt(b)}\n")
    files.append(lanczos_path.name)

    times = _krylov_times(cfg)
    profile = krylov_profile(job.hamiltonian, observable, data, times)
    profile_path = out_dir / f"kprofile_{job.label}.csv"
    with profile_path.open("w", newline="") as fh:
        fh.write("t,C_K,S_K\n")
        for t, c, s in zip(profile.times, profile.complexity, profile.entropy):
            fh.write(f"{_fmt(t)},{_fmt(c)},{_fmt(s)}\n")
    files.append(profile_path.name)
    return files


def _krylov_times(cfg) -> np.ndarray:
    if cfg.krylov_times == "auto":
        return default_time_grid(cfg.dim_hilbert)
    try:
        lo, hi, num = cfg.krylov_times.split(":")
        return np.linspace(float(lo), float(hi), int(num))
    except ValueError as exc:
        raise ConfigError(
            f"bad krylov_times {cfg.krylov_times!r}; expected 'lo:hi:num'"
        ) from exc
