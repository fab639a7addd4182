"""Monte-Carlo campaigns over a scenario and the analytic-vs-Monte-Carlo oracle report."""
from __future__ import annotations

import hashlib
import json
import logging
import shutil
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import oracle
from .errors import MemEkfError, ScenarioError
from .filter import FilterState, time_update, update_scan, update_single_diagnostics
from .metrics import ErrorSeries, gw_distance, rms_series
from .moments import pseudo_cross_cov, pseudo_meas_cov, pseudo_meas_mean, shape_sensitivity, spread_covariance
from .random_matrix import extent_to_params, rm_predict, rm_to_summary, rm_update
from .scenarios import Scenario, load_scenario
from .simulate import gen_measurements, gen_truth
from .state import to_ellipse_summary

log = logging.getLogger(__name__)

CSV_COLUMNS = ("k", "cx", "cy", "alpha", "l1", "l2", "gw")
MEMEKF = "mem-ekf-star"
RANDOM_MATRIX = "random-matrix"


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    trackers: tuple[str, ...] = (MEMEKF,)
    runs: int = 1
    seed: int | None = None
    out: str = "results"
    diagnostics: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not self.trackers:
            raise ValueError("no tracker selected")


@dataclass
class TrackResult:
    """Per-step estimates (k, cx, cy, alpha, l1, l2) and GW errors of one run."""

    rows: np.ndarray
    gw: np.ndarray
    clamp_events: int = 0

    def series(self) -> ErrorSeries:
        return ErrorSeries(tuple(int(k) for k in self.rows[:, 0]), tuple(float(d) for d in self.gw))


def _label(tracker: str) -> str:
    return tracker.replace(":", "_")


def parse_tracker(tracker: str) -> tuple[str, str | None]:
    name, _, variant = tracker.partition(":")
    if name not in (MEMEKF, RANDOM_MATRIX):
        raise ScenarioError(f"unknown tracker {tracker!r}; expected {MEMEKF}[:variant] or {RANDOM_MATRIX}")
    if name == RANDOM_MATRIX and variant:
        raise ScenarioError("random-matrix has no variants")
    return name, variant or None


def run_memekf(scenario: Scenario, truth, batches, variant: str | None = None, diag_sink=None) -> TrackResult:
    if scenario.memekf is None:
        raise ScenarioError("scenario has no 'memekf' block")
    state, cfg = scenario.memekf.variant(variant).build(scenario.spec)
    K = len(batches)
    rows = np.empty((K, 6))
    gw = np.empty(K)
    for k, batch in enumerate(batches):
        if diag_sink is None:
            state = update_scan(state, batch, cfg)
        else:
            for i, y in enumerate(batch.detections):
                state, d = update_single_diagnostics(state, y, cfg)
                diag_sink({"k": k, "i": i, **d.to_dict()})
        est = to_ellipse_summary(state.kin, state.shape)
        rows[k] = (k, *state.kin.mean[:2], *state.shape.mean)
        gw[k] = gw_distance(truth.summary(k), est)
        if k < K - 1:
            state = time_update(state, cfg)
    return TrackResult(rows, gw, state.clamp_events)


def run_random_matrix(scenario: Scenario, truth, batches) -> TrackResult:
    if scenario.random_matrix is None:
        raise ScenarioError("scenario has no 'random_matrix' block")
    state, dyn = scenario.random_matrix.build(scenario.spec)
    C_v = scenario.spec.sensor.meas_noise_cov
    K = len(batches)
    rows = np.empty((K, 6))
    gw = np.empty(K)
    for k, batch in enumerate(batches):
        state = rm_update(state, batch, C_v)
        est = rm_to_summary(state)
        rows[k] = (k, *est.center, *extent_to_params(est.extent))
        gw[k] = gw_distance(truth.summary(k), est)
        if k < K - 1:
            state = rm_predict(state, dyn)
    return TrackResult(rows, gw)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, rows: np.ndarray, gw) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for row, d in zip(rows, gw):
        lines.append(",".join([str(int(row[0])), *(_fmt(x) for x in row[1:]), _fmt(d)]))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path: Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def aggregate(results: list[TrackResult]) -> tuple[np.ndarray, ErrorSeries]:
    """Mean estimates over runs and the RMS error series."""
    rows = np.mean([r.rows for r in results], axis=0)
    return rows, rms_series([r.series() for r in results])


def run_campaign(cfg: RunConfig) -> dict:
    """Run every tracker on ``cfg.runs`` simulated runs and write the results.

    Layout of ``cfg.out``::

        manifest.json
        <tracker>/run_000.csv ... aggregate.csv

    Files are staged in a temporary directory and only moved into place when
    the whole campaign succeeds.
    """
    scenario, raw = load_scenario(cfg.scenario)
    trackers = [parse_tracker(t) for t in cfg.trackers]
    seed = scenario.spec.seed if cfg.seed is None else int(cfg.seed)
    truth = gen_truth(scenario.spec)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        per_tracker: dict[str, list[TrackResult]] = {t: [] for t in cfg.trackers}
        for tracker in cfg.trackers:
            (staging / _label(tracker)).mkdir()
        for run in range(cfg.runs):
            batches = gen_measurements(truth, scenario.spec.sensor, seed, run, scenario.spec.fixed_count)
            for tracker, (name, variant) in zip(cfg.trackers, trackers):
                tdir = staging / _label(tracker)
                if name == MEMEKF:
                    sink, fh = None, None
                    if cfg.diagnostics:
                        fh = open(tdir / f"diagnostics_{run:03d}.jsonl", "w")
                        sink = lambda rec, fh=fh: fh.write(json.dumps(rec) + "\n")
                    try:
                        res = run_memekf(scenario, truth, batches, variant, sink)
                    finally:
                        if fh is not None:
                            fh.close()
                else:
                    res = run_random_matrix(scenario, truth, batches)
                write_csv(tdir / f"run_{run:03d}.csv", res.rows, res.gw)
                per_tracker[tracker].append(res)
            log.info("run %d/%d done", run + 1, cfg.runs)

        summary = {}
        for tracker, results in per_tracker.items():
            rows, series = aggregate(results)
            write_csv(staging / _label(tracker) / "aggregate.csv", rows, series.gw)
            summary[tracker] = {
                "clamp_events": [r.clamp_events for r in results],
                "final_rmgw": series.gw[-1],
                "mean_rmgw": float(np.mean(series.gw)),
            }

        # the output location does not influence results, so it is not part of the hash
        config = {k: v for k, v in asdict(cfg).items() if k != "out"}
        config_doc = json.dumps({**config, "trackers": list(cfg.trackers), "seed": seed}, sort_keys=True)
        manifest = {
            "scenario": scenario.name or str(cfg.scenario),
            "config_hash": hashlib.sha256(raw + b"\0" + config_doc.encode()).hexdigest(),
            "scenario_sha256": hashlib.sha256(raw).hexdigest(),
            "config": json.loads(config_doc),
            "rng": "philox(seed, 0, run, step) per measurement scan",
            "run_seeds": [[seed, 0, run] for run in range(cfg.runs)],
            "steps": len(truth),
            "trackers": summary,
        }
        (staging / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

        for item in sorted(staging.iterdir()):
            target = out / item.name
            if target.is_dir():
                shutil.rmtree(target)
            elif target.exists():
                target.unlink()
            item.rename(target)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return manifest


# ---------------------------------------------------------------------------
# oracle

STATIONARY_PRIOR = {
    "p_hat": [0.0, 2.0, 12.0],
    "C_p": np.diag([1.0, 4.0, 9.0]),
    "C_h": np.eye(2) / 4,
    "C_v": np.diag([2.0, 2.0]),
    "r_hat": [1.0, 1.0],
    "C_r": np.eye(2),
    "C_y": np.array([[2.0, 1.0], [1.0, 3.0]]),
}


def _target_spread_cov(N, seed, q):
    C_I, C_II = spread_covariance(q["p_hat"], q["C_p"], q["C_h"])
    return [oracle.make_report("spread_cov", C_I + C_II, oracle.mc_spread_cov(q["p_hat"], q["C_p"], q["C_h"], N, seed))]


def _target_pseudo_moments(N, seed, q):
    mean, cov = oracle.mc_pseudo_moments(q["C_y"], N, seed)
    return [
        oracle.make_report("pseudo_mean", pseudo_meas_mean(q["C_y"]), mean),
        oracle.make_report("pseudo_cov", pseudo_meas_cov(q["C_y"]), cov),
    ]


def _target_cross_cov(N, seed, q):
    est = oracle.mc_cross_cov(q["p_hat"], q["C_p"], q["C_h"], q["C_v"], q["r_hat"], q["C_r"], N, seed)
    return [oracle.make_report("cross_cov", pseudo_cross_cov(q["p_hat"], q["C_p"], q["C_h"]), est)]


def _target_pseudo_jacobian(N, seed, q):
    est = oracle.mc_pseudo_jacobian(q["p_hat"], q["C_h"], q["C_v"], q["r_hat"], q["C_r"], N, seed)
    return [oracle.make_report("pseudo_jacobian", shape_sensitivity(q["p_hat"], q["C_h"]), est)]


ORACLE_TARGETS = {
    "spread_cov": _target_spread_cov,
    "pseudo_moments": _target_pseudo_moments,
    "cross_cov": _target_cross_cov,
    "pseudo_jacobian": _target_pseudo_jacobian,
}


def run_oracle(targets: list[str], N: int, seed: int, out: str | Path | None = None) -> list[oracle.OracleReport]:
    """Compare analytic moments at the stationary-scenario prior with Monte-Carlo estimates."""
    unknown = [t for t in targets if t not in ORACLE_TARGETS]
    if unknown:
        raise ScenarioError(f"unknown oracle target(s) {unknown}; choose from {sorted(ORACLE_TARGETS)}")
    if N < oracle.MIN_SAMPLES:
        raise ValueError(f"need at least {oracle.MIN_SAMPLES} samples")
    reports = []
    for t in targets:
        reports.extend(ORACLE_TARGETS[t](N, seed, STATIONARY_PRIOR))
    if out is not None:
        Path(out).write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
    return reports


__all__ = [
    "RunConfig", "run_campaign", "run_oracle", "run_memekf", "run_random_matrix",
    "aggregate", "read_csv", "write_csv", "MemEkfError",
]
