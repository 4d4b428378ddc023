"""Experiment configuration and run manifest.

Configs are flat ``key = value`` text files with '#' comments; any key can
be overridden on the command line via ``--set key=value``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

MODELS = ("tki", "ti", "xxz", "coe", "goe")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def _parse_bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_float_list(s: str) -> list[float]:
    try:
        return [float(tok) for tok in s.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad number list {s!r}") from exc


@dataclass
class ExperimentConfig:
    model: str
    L: int
    seed: int
    observable: str = "s1y"
    # tilted-field Ising parameters (h_z may sweep)
    J: float = 1.0
    h_x: float = 1.4
    h_z: list[float] = field(default_factory=lambda: [1.4])
    # XXZ parameters (g may sweep)
    J_xy: float = 1.0
    J_zz: float = 1.1
    g: list[float] = field(default_factory=lambda: [0.0])
    impurity_site: int = 1
    impurity_axis: str = "z"
    # record / reconstruction controls
    horizon: int | None = None  # default 2 d^2
    ensemble_size: int = 80
    sigma: float = 0.0
    epsilon: float | None = None  # None -> 1e-6 Tr(C^-1)/(d^2-1) per step
    first_record: int = 0
    dt: float = 1.0
    eval_steps: str = "auto"
    fidelity_steps: str = "final"
    rank_rel_tol: float = 1e-10
    # Krylov controls
    krylov: bool = False
    zero_tol: float = 1e-8
    krylov_times: str = "auto"
    # RMT baselines
    rmt_samples: int = 1
    threads: int = 1
    out: str | None = None

    @property
    def dim_hilbert(self) -> int:
        return 2**self.L

    @property
    def n_records(self) -> int:
        if self.horizon is not None:
            return self.horizon
        return 2 * self.dim_hilbert**2

    def chaos_values(self) -> list[float]:
        """Swept chaoticity parameter values, one job per value."""
        if self.model in ("tki", "ti"):
            return list(self.h_z)
        if self.model == "xxz":
            return list(self.g)
        return [float(i) for i in range(self.rmt_samples)]

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.L < 2:
            raise ConfigError(f"need at least 2 spins, got L={self.L}")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size must be >= 1")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if self.n_records < 1:
            raise ConfigError("horizon must be >= 1")
        if self.first_record not in (0, 1):
            raise ConfigError("first_record must be 0 or 1")
        if not 1 <= self.impurity_site <= self.L:
            raise ConfigError(
                f"impurity_site {self.impurity_site} outside 1..{self.L}"
            )
        if self.krylov and self.model in ("tki", "coe"):
            raise ConfigError(
                "Krylov coefficients need a time-independent Hamiltonian; "
                f"model {self.model!r} is a unitary map"
            )
        for site in observable_sites(self.observable):
            if not 1 <= site <= self.L:
                raise ConfigError(
                    f"observable {self.observable!r} references site {site}, "
                    f"but L={self.L}"
                )

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "ExperimentConfig":
        raw = dict(raw)
        converters = {
            "model": str,
            "L": int,
            "seed": int,
            "observable": str,
            "J": float,
            "h_x": float,
            "h_z": _parse_float_list,
            "J_xy": float,
            "J_zz": float,
            "g": _parse_float_list,
            "impurity_site": int,
            "impurity_axis": str,
            "horizon": int,
            "ensemble_size": int,
            "sigma": float,
            "epsilon": lambda s: None if s == "auto" else float(s),
            "first_record": int,
            "dt": float,
            "eval_steps": str,
            "fidelity_steps": str,
            "rank_rel_tol": float,
            "krylov": _parse_bool,
            "zero_tol": float,
            "krylov_times": str,
            "rmt_samples": int,
            "threads": int,
            "out": str,
        }
        kwargs = {}
        for key, value in raw.items():
            if key not in converters:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                kwargs[key] = converters[key](value)
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
        for required in ("model", "L", "seed"):
            if required not in kwargs:
                raise ConfigError(f"missing required key {required!r}")
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, overrides: dict[str, str] | None = None) -> "ExperimentConfig":
        raw = parse_kv_file(path)
        if overrides:
            raw.update(overrides)
        return cls.from_mapping(raw)


def parse_kv_file(path) -> dict[str, str]:
    raw: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def observable_sites(spec: str) -> list[int]:
    """Sites referenced by an observable spec ('s1y', 'Sx', 's2y+s4y')."""
    sites = []
    for term in spec.split("+"):
        term = term.strip()
        if term in ("Sx", "Sy", "Sz"):
            continue
        if len(term) >= 3 and term[0] == "s" and term[-1] in "xyz":
            sites.append(int(term[1:-1]))
        else:
            raise ConfigError(f"cannot parse observable term {term!r}")
    return sites


@dataclass
class RunManifest:
    """Everything needed to interpret (and reproduce) one run directory."""

    config: dict
    version: str
    wall_time_s: float
    files: dict[str, list[str]]
    resolved: dict
    warnings: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))
