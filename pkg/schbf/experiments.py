import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union, get_args, get_origin

import numpy as np
import pandas as pd

from schbf import config
from schbf.baselines import FD_STRONGEST, HBF_STRONGEST, IFD, ifd_solution, strongest_path_fd, strongest_path_hbf
from schbf.channel import ChannelModelConfig, frequency_response, sample_channel, tap_matrices
from schbf.exceptions import ConfigurationError
from schbf.hbf import SolverConfig, SystemConfig, solve_hbf
from schbf.link import QamConstellation, SimulationResult, run_ber_point
from schbf.presets import load_preset

logger = logging.getLogger(__name__)

EVD_HBF = "evd-hbf"
SCHEMES = [IFD, EVD_HBF, FD_STRONGEST, HBF_STRONGEST]
SWEEPS = ["snr", "n_rf"]

# spawn-key roots of the seed tree
_CHANNEL_KEY, _SOLVER_KEY, _LINK_KEY = 0, 1, 2

# per-point fields kept in the diagnostics report
_POINT_KEYS = ("scheme", "snr_db", "n_rf", "blocks", "bits", "errors", "pooled_ber", "early_stopped")


@dataclass
class ExperimentConfig:
    name: str = "custom"
    description: str = ""
    sweep: str = "snr"
    n_tx: int = config.DEFAULT_N_TX
    n_rx: int = config.DEFAULT_N_RX
    n_rf: int = config.DEFAULT_N_RF
    n_streams: int = config.DEFAULT_N_STREAMS
    block_length: int = config.DEFAULT_BLOCK_LENGTH
    cp_length: int = config.DEFAULT_CP_LENGTH
    qam_order: int = config.DEFAULT_QAM_ORDER
    n_clusters: int = config.DEFAULT_N_CLUSTERS
    n_rays: int = config.DEFAULT_N_RAYS
    angle_spread_deg: float = config.DEFAULT_ANGLE_SPREAD_DEG
    schemes: List[str] = field(default_factory=lambda: list(SCHEMES))
    snr_db: List[float] = field(default_factory=lambda: [-20.0, -15.0, -10.0, -5.0, 0.0])
    n_rf_values: List[int] = field(default_factory=lambda: [2, 3, 4])
    fixed_snr_db: float = -18.0
    trials: int = 20
    max_blocks: int = config.DEFAULT_MAX_BLOCKS
    min_errors: Optional[int] = config.DEFAULT_MIN_ERRORS
    max_iters: int = config.DEFAULT_MAX_ITERS
    rel_tol: float = config.DEFAULT_REL_TOL
    seed: int = 0

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError(f"unknown config keys {unknown}; valid keys: {sorted(known)}")
        types = {f.name: f.type for f in fields(cls)}
        wrong = sorted(key for key, value in values.items() if not _matches_type(value, types[key]))
        if wrong:
            details = ", ".join(f"{key}={values[key]!r}" for key in wrong)
            raise ConfigurationError(f"config values of the wrong type: {details}")
        cfg = cls(**dict(values))
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_mapping(json.load(f))

    @classmethod
    def from_preset(cls, name: str) -> "ExperimentConfig":
        return cls.from_mapping(load_preset(name))

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        values = self.to_dict()
        values.update({key: value for key, value in overrides.items() if value is not None})
        return self.from_mapping(values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def validate(self) -> None:
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ConfigurationError(f"unknown schemes {bad}; valid schemes: {SCHEMES}")
        if self.sweep not in SWEEPS:
            raise ConfigurationError(f"unknown sweep {self.sweep!r}; valid sweeps: {SWEEPS}")
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if self.max_blocks < 1:
            raise ConfigurationError("max_blocks must be at least 1")
        if self.sweep == "snr" and not self.snr_db:
            raise ConfigurationError("snr_db sweep is empty")
        if self.sweep == "n_rf":
            if not self.n_rf_values:
                raise ConfigurationError("n_rf_values sweep is empty")
            low = [n for n in self.n_rf_values if n < self.n_streams]
            if low:
                raise ConfigurationError(f"n_rf values {low} are below n_streams={self.n_streams}")
        # raises on inconsistent sizes
        for n_rf in self.n_rf_points():
            self.system(n_rf, 0.0)
        self.channel_model()
        QamConstellation(self.qam_order)

    def n_rf_points(self) -> List[int]:
        return list(self.n_rf_values) if self.sweep == "n_rf" else [self.n_rf]

    def system(self, n_rf: int, snr_db: float) -> SystemConfig:
        return SystemConfig(
            n_tx=self.n_tx, n_rx=self.n_rx, n_rf=n_rf, n_streams=self.n_streams,
            block_length=self.block_length, snr_db=snr_db,
        )

    def channel_model(self) -> ChannelModelConfig:
        return ChannelModelConfig(
            n_tx=self.n_tx, n_rx=self.n_rx, n_clusters=self.n_clusters, n_rays=self.n_rays,
            angle_spread=float(np.deg2rad(self.angle_spread_deg)), cp_length=self.cp_length,
        )


def _matches_type(value: Any, annotation: Any) -> bool:
    origin = get_origin(annotation)
    if origin is Union:
        return any(_matches_type(value, arg) for arg in get_args(annotation))
    if origin is list:
        (item,) = get_args(annotation)
        return isinstance(value, list) and all(_matches_type(v, item) for v in value)
    if annotation is type(None):
        return value is None
    # isinstance treats bools as ints
    if isinstance(value, bool):
        return False
    if annotation is float:
        return isinstance(value, (int, float))
    return isinstance(value, annotation)


def _seed_sequence(root: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(root, spawn_key=key)


class ExperimentRunner:
    """Runs sweep points: draws channels, designs every scheme, simulates the link."""

    def __init__(self, cfg: ExperimentConfig):
        cfg.validate()
        self.cfg = cfg
        self.constellation = QamConstellation(cfg.qam_order)
        self.diagnostics: List[Dict[str, Any]] = []
        self.points: List[Dict[str, Any]] = []

    def trial_channel(self, trial: int):
        rng = np.random.default_rng(_seed_sequence(self.cfg.seed, _CHANNEL_KEY, trial))
        channel = sample_channel(self.cfg.channel_model(), rng)
        taps = tap_matrices(channel, self.cfg.n_tx, self.cfg.n_rx)
        return channel, taps, frequency_response(taps, self.cfg.block_length)

    def solver_config(self, trial: int) -> SolverConfig:
        seed = int(_seed_sequence(self.cfg.seed, _SOLVER_KEY, trial).generate_state(1)[0])
        return SolverConfig(max_iters=self.cfg.max_iters, rel_tol=self.cfg.rel_tol, seed=seed)

    def design(self, scheme: str, channel, channel_freq, sys: SystemConfig, trial: int):
        if scheme == EVD_HBF:
            solution, diagnostics = solve_hbf(channel_freq, sys, self.solver_config(trial))
            self.diagnostics.append(
                {"trial": trial, "snr_db": sys.snr_db, "n_rf": sys.n_rf, **diagnostics.to_dict()}
            )
            return solution
        if scheme == IFD:
            return ifd_solution(channel_freq, sys)
        if scheme == FD_STRONGEST:
            return strongest_path_fd(channel, channel_freq, sys)
        if scheme == HBF_STRONGEST:
            return strongest_path_hbf(channel, channel_freq, sys)
        raise ConfigurationError(f"unknown scheme {scheme!r}; valid schemes: {SCHEMES}")

    def run_point(self, point: int, snr_db: float, n_rf: int) -> List[Dict[str, Any]]:
        """One CSV row per scheme for a single (SNR, N_RF) operating point."""
        sys = self.cfg.system(n_rf, snr_db)
        totals = {scheme: [] for scheme in self.cfg.schemes}
        for trial in range(self.cfg.trials):
            channel, taps, channel_freq = self.trial_channel(trial)
            for index, scheme in enumerate(self.cfg.schemes):
                solution = self.design(scheme, channel, channel_freq, sys, trial)
                totals[scheme].append(run_ber_point(
                    solution, taps, sys.noise_var, self.cfg.max_blocks,
                    _seed_sequence(self.cfg.seed, _LINK_KEY, trial, point, index),
                    cp_len=self.cfg.cp_length, n=self.cfg.block_length,
                    constellation=self.constellation, min_errors=self.cfg.min_errors,
                ))

        rows = []
        for scheme in self.cfg.schemes:
            row = aggregate_trials(totals[scheme])
            row.update(scheme=scheme, snr_db=float(snr_db), n_rf=int(n_rf))
            logger.info(
                "%s at snr=%.1f dB n_rf=%d: ber=%.3e", scheme, snr_db, n_rf, row["ber"],
                extra={"scheme": scheme, "snr_db": snr_db, "n_rf": n_rf, "ber": row["ber"], "errors": row["errors"]},
            )
            rows.append(row)
        self.points.extend(
            {key: row[key] for key in _POINT_KEYS} for row in rows
        )
        return rows

    def run_snr_sweep(self) -> pd.DataFrame:
        rows = []
        for point, snr_db in enumerate(self.cfg.snr_db):
            rows.extend(self.run_point(point, snr_db, self.cfg.n_rf))
        return _table(rows)

    def diagnostics_report(self) -> Dict[str, Any]:
        """Solver traces and per-point early-stop flags of everything run so far."""
        return {"config": self.cfg.to_dict(), "solver": self.diagnostics, "points": self.points}

    def run_nrf_sweep(self) -> pd.DataFrame:
        rows = []
        for point, n_rf in enumerate(self.cfg.n_rf_values):
            rows.extend(self.run_point(point, self.cfg.fixed_snr_db, n_rf))
        return _table(rows)


def aggregate_trials(results: List[SimulationResult]) -> Dict[str, Any]:
    """Sum counts over trials; BER and MSE are averaged over channel realizations.

    Averaging per realization keeps early-stopped (bad) channels from being
    under-weighted. ``pooled_ber`` is errors/bits over all trials and stays
    out of the CSV.
    """
    merged = SimulationResult()
    for result in results:
        merged = merged.merge(result)
    return {
        "blocks": merged.blocks,
        "bits": merged.bits,
        "errors": merged.errors,
        "ber": float(np.mean([r.ber for r in results])),
        "pooled_ber": merged.ber,
        "mse": float(np.mean([r.mse for r in results])),
        "papr_p50_db": merged.papr_percentile(50),
        "papr_p99_db": merged.papr_percentile(99),
        "early_stopped": merged.early_stopped,
    }


def _table(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(rows)[config.CSV_COLUMNS]


def run_snr_sweep(cfg: ExperimentConfig) -> pd.DataFrame:
    return ExperimentRunner(cfg).run_snr_sweep()


def run_nrf_sweep(cfg: ExperimentConfig) -> pd.DataFrame:
    if cfg.sweep != "n_rf":
        cfg = cfg.with_overrides(sweep="n_rf")
    return ExperimentRunner(cfg).run_nrf_sweep()


def summarize(table: pd.DataFrame) -> Dict[str, Any]:
    """Per-scheme summary of a sweep table."""
    if table.empty:
        return {"status": "No points simulated", "summary": {}}

    grouped = table.groupby("scheme", sort=False)
    counts = grouped[["errors", "bits"]].sum()
    summary = {
        "total_points": len(table),
        "total_errors": int(table["errors"].sum()),
        "mean_ber_by_scheme": grouped["ber"].mean().to_dict(),
        "pooled_ber_by_scheme": (counts["errors"] / counts["bits"]).to_dict(),
        "worst_ber_by_scheme": grouped["ber"].max().to_dict(),
        "mean_mse_by_scheme": grouped["mse"].mean().to_dict(),
        "points_below_min_errors": int((table["errors"] < config.DEFAULT_MIN_ERRORS).sum()),
    }
    return {"status": "Sweep Complete", "summary": summary}


def write_table(table: pd.DataFrame, path: Union[str, Path], resolved_config: Dict[str, Any]) -> Path:
    """CSV preceded by comment lines with the schema version and resolved config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = (
        f"# schbf results schema v{config.CSV_SCHEMA_VERSION}: {','.join(config.CSV_COLUMNS)}\n"
        f"# config: {json.dumps(resolved_config, sort_keys=True)}\n"
    )
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(header)
        table.to_csv(f, index=False, lineterminator="\n")
    return path


def read_table(path: Union[str, Path]) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """Inverse of :func:`write_table`: (rows, resolved config)."""
    resolved = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.startswith("# config: "):
                resolved = json.loads(line[len("# config: "):])
            elif not line.startswith("#"):
                break
    return pd.read_csv(path, comment="#"), resolved
