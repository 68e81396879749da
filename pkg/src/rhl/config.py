"""Experiment configuration: JSON ingestion with strict validation, canonical
hashing for reproducibility stamps, and deterministic per-replication seed
derivation.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .analytics import Convention, LimitParams
from .hawkes import HawkesBase
from .kernels import CrossExciteKernel, PreLimitFamily


def config_hash(payload: dict) -> str:
    """sha256 of the canonical (sorted-keys) JSON serialization."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def spawn_seeds(master: int, n: int) -> list[int]:
    """Counter-based replication seeds derived from one master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master).spawn(n)]


_LIMIT_KEYS = {"alpha1", "alpha2", "scale1", "scale2", "coupling",
               "base1", "base2", "level1", "level2"}
_HAWKES_KEYS = {"alpha1", "alpha2", "crit1", "crit2", "base1", "base2",
                "cross_limit", "cross_rate", "cross_l1", "family",
                "family_scale", "ml_cap"}


def limit_params_from_dict(d: dict) -> LimitParams:
    unknown = set(d) - _LIMIT_KEYS
    if unknown:
        raise ValueError(f"unknown limit-parameter fields: {sorted(unknown)}")
    return LimitParams(**d)


def hawkes_base_from_dict(d: dict) -> HawkesBase:
    unknown = set(d) - _HAWKES_KEYS
    if unknown:
        raise ValueError(f"unknown hawkes-parameter fields: {sorted(unknown)}")
    d = dict(d)
    cross = CrossExciteKernel(d.pop("cross_rate", 1.0), d.pop("cross_l1", 1.0))
    return HawkesBase(cross=cross, **d)


def sweep_family_from_dict(d: dict) -> PreLimitFamily:
    keys = {"alpha1", "alpha2", "lam1", "lam2", "scale1", "scale2",
            "cross_limit", "cross_rate", "cross_l1", "family"}
    unknown = set(d) - keys
    if unknown:
        raise ValueError(f"unknown sweep-parameter fields: {sorted(unknown)}")
    d = dict(d)
    cross = CrossExciteKernel(d.pop("cross_rate", 1.0), d.pop("cross_l1", 1.0))
    return PreLimitFamily(cross=cross, **d)


@dataclass(frozen=True)
class ExperimentConfig:
    """One JSON document drives every subcommand; unknown fields are rejected
    and all tolerances live here so acceptance thresholds are auditable."""

    seed: int = 20260808
    out_dir: str = "artifacts"
    threads: int = 1
    convention: str = "sqrt"
    # limit-system model + discretization
    limit: dict = field(default_factory=lambda: {
        "alpha1": 0.6, "alpha2": 0.8, "scale1": 1.0, "scale2": 1.0,
        "coupling": 0.5, "base1": 1.0, "base2": 1.0, "level1": 1.0, "level2": 1.0,
    })
    sve_log2_dt: int = 10
    sve_n_paths: int = 10000
    sve_emit_paths: int = 0
    crho_couplings: tuple = (0.25, 0.5, 0.75)
    # pre-limit sweep model
    sweep: dict = field(default_factory=lambda: {
        "alpha1": 0.6, "alpha2": 0.8, "lam1": 1.0, "lam2": 1.0,
        "scale1": 1.0, "scale2": 1.0, "cross_limit": 0.5,
        "cross_rate": 1.0, "cross_l1": 1.0, "family": "ml",
    })
    sweep_T: tuple = (1e2, 1e3, 1e4)
    # hawkes simulation model
    hawkes: dict = field(default_factory=lambda: {
        "alpha1": 0.6, "alpha2": 0.8, "crit1": 1.0, "crit2": 1.0,
        "base1": 0.5, "base2": 0.5, "cross_limit": 0.5,
        "cross_rate": 1.0, "cross_l1": 1.0, "family": "pareto",
    })
    hawkes_T: float = 500.0
    hawkes_replications: int = 200
    approx_mode: bool = False
    tolerances: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "sweep_T" in data:
            data["sweep_T"] = tuple(data["sweep_T"])
        if "crho_couplings" in data:
            data["crho_couplings"] = tuple(data["crho_couplings"])
        cfg = cls(**data)
        # validate nested parameter blocks eagerly
        limit_params_from_dict(cfg.limit)
        sweep_family_from_dict(cfg.sweep)
        hawkes_base_from_dict(cfg.hawkes)
        if cfg.convention not in ("linear", "sqrt"):
            raise ValueError("convention must be 'linear' or 'sqrt'")
        return cfg

    def payload(self) -> dict:
        d = asdict(self)
        d["sweep_T"] = list(self.sweep_T)
        d["crho_couplings"] = list(self.crho_couplings)
        return d

    @property
    def hash(self) -> str:
        return config_hash(self.payload())

    @property
    def rho_convention(self) -> Convention:
        return Convention.LINEAR if self.convention == "linear" else Convention.SQRT

    def limit_params(self) -> LimitParams:
        return limit_params_from_dict(self.limit)

    def sweep_family(self) -> PreLimitFamily:
        return sweep_family_from_dict(self.sweep)

    def hawkes_base(self) -> HawkesBase:
        return hawkes_base_from_dict(self.hawkes)
