"""Scenario documents: ground-truth spec plus tracker priors and noise settings.

A scenario is a JSON object. Truth/sensor fields sit at the top level::

    kind, steps, T, speed_mps, waypoints, axes, alpha0, center0,
    poisson_mean, meas_noise_var, seed, fixed_count, turn

Tracker setup goes in ``memekf`` and ``random_matrix`` blocks. Any covariance
may be written as a full matrix or as the list of its diagonal entries.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ScenarioError
from .filter import FilterConfig, FilterState
from .moments import shape_matrix
from .random_matrix import RMState
from .simulate import ScenarioSpec, TurnSchedule
from .state import DynamicsModel, KinematicState, ShapeState, cv_transition

MOTIONS = ("static", "cv", "ct")
SPEC_FIELDS = {
    "kind", "steps", "T", "speed_mps", "waypoints", "axes", "alpha0", "center0",
    "poisson_mean", "meas_noise_var", "seed", "fixed_count", "turn", "name",
}


def as_matrix(value, n: int | None = None) -> np.ndarray:
    a = np.asarray(value, dtype=float)
    if a.ndim == 1:
        a = np.diag(a)
    if n is not None and a.shape != (n, n):
        raise ScenarioError(f"expected a {n}x{n} matrix, got shape {a.shape}")
    return a


def _transition(motion: str, n: int, T: float) -> np.ndarray:
    if motion == "cv":
        if n != 4:
            raise ScenarioError("cv motion needs a 4-dimensional kinematic state")
        return cv_transition(T)
    return np.eye(n)


@dataclass(frozen=True)
class MemEkfSetup:
    kin_mean: tuple
    kin_cov: Any
    shape_mean: tuple
    shape_cov: Any
    Q_r: Any
    Q_p: Any
    motion: str = "cv"
    axis_floor: float = 1e-4
    variants: dict = field(default_factory=dict)

    def variant(self, name: str | None) -> "MemEkfSetup":
        if not name:
            return self
        if name not in self.variants:
            raise ScenarioError(f"unknown mem-ekf-star variant {name!r}; have {sorted(self.variants)}")
        override = dict(self.variants[name])
        base = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "variants"}
        base.update(override)
        return MemEkfSetup(**base)

    def build(self, spec: ScenarioSpec) -> tuple[FilterState, FilterConfig]:
        if self.motion not in MOTIONS:
            raise ScenarioError(f"unknown motion {self.motion!r}")
        n = len(self.kin_mean)
        if n not in (4, 5):
            raise ScenarioError(f"kinematic state must have 4 or 5 entries, got {n}")
        if self.motion == "ct" and n != 5:
            raise ScenarioError("ct motion needs a turn-rate state")
        dyn = DynamicsModel(
            _transition(self.motion, n, spec.T), np.eye(3),
            as_matrix(self.Q_r, n), as_matrix(self.Q_p, 3),
            spec.T, turn_coupling=self.motion == "ct",
        )
        state = FilterState(
            KinematicState(self.kin_mean, as_matrix(self.kin_cov, n)),
            ShapeState(self.shape_mean, as_matrix(self.shape_cov, 3)),
        )
        return state, FilterConfig(spec.sensor, dyn, self.axis_floor)


@dataclass(frozen=True)
class RandomMatrixSetup:
    kin_mean: tuple
    kin_cov: Any
    Q_r: Any
    extent_params: tuple
    v: float = 56.0
    tau: float | None = 50.0
    z: float = 4.0
    motion: str = "cv"

    def build(self, spec: ScenarioSpec) -> tuple[RMState, DynamicsModel]:
        n = len(self.kin_mean)
        if self.motion not in ("static", "cv"):
            raise ScenarioError("random-matrix baseline supports static or cv motion only")
        dyn = DynamicsModel(_transition(self.motion, n, spec.T), np.eye(3), as_matrix(self.Q_r, n),
                            np.zeros((3, 3)), spec.T)
        S = shape_matrix(self.extent_params)
        kin = KinematicState(self.kin_mean, as_matrix(self.kin_cov, n))
        return RMState.from_extent(kin, S @ S.T, self.v, self.tau, self.z), dyn


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    memekf: MemEkfSetup | None
    random_matrix: RandomMatrixSetup | None
    name: str = ""


def parse_scenario(doc: dict) -> Scenario:
    doc = copy.deepcopy(doc)
    unknown = set(doc) - SPEC_FIELDS - {"memekf", "random_matrix"}
    if unknown:
        raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
    if "kind" not in doc or "seed" not in doc:
        raise ScenarioError("scenario needs 'kind' and 'seed'")
    mem = doc.pop("memekf", None)
    rm = doc.pop("random_matrix", None)
    turn = doc.pop("turn", None)
    kwargs = {k: (tuple(map(tuple, v)) if k == "waypoints" else tuple(v) if isinstance(v, list) else v)
              for k, v in doc.items()}
    if turn is not None:
        kwargs["turn"] = TurnSchedule(**turn)
    try:
        spec = ScenarioSpec(**kwargs)
        mem_setup = MemEkfSetup(**mem) if mem is not None else None
        rm_setup = RandomMatrixSetup(**rm) if rm is not None else None
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(spec, mem_setup, rm_setup, doc.get("name", ""))


def load_scenario(path_or_name: str | Path) -> tuple[Scenario, bytes]:
    """Load a scenario file, or a built-in by name. Returns the parsed scenario
    and the exact document bytes (hashed into run manifests)."""
    key = str(path_or_name)
    if key in BUILTIN:
        raw = dump_builtin(key).encode()
    else:
        path = Path(key)
        if not path.is_file():
            raise ScenarioError(f"no scenario file or built-in named {key!r}")
        raw = path.read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return parse_scenario(doc), raw


def dump_builtin(name: str) -> str:
    return json.dumps(BUILTIN[name], indent=2) + "\n"


KMH = 1000 / 3600
_V_CV = 50 * KMH
_HEADING_TURN = math.atan2(20, 100)

BUILTIN: dict[str, dict] = {
    # Stationary ellipse, one detection per update.
    "stationary_iv_a": {
        "name": "stationary_iv_a",
        "kind": "stationary",
        "steps": 100,
        "T": 1.0,
        "axes": [2.0, 9.0],
        "alpha0": math.pi / 3,
        "center0": [0.0, 0.0],
        "poisson_mean": 1.0,
        "fixed_count": 1,
        "meas_noise_var": [2.0, 2.0],
        "seed": 20190101,
        "memekf": {
            "kin_mean": [1.0, 1.0, 0.0, 0.0],
            "kin_cov": [1.0, 1.0, 0.0, 0.0],
            "shape_mean": [0.0, 2.0, 12.0],
            "shape_cov": [1.0, 4.0, 9.0],
            "Q_r": [0.0, 0.0, 0.0, 0.0],
            "Q_p": [0.0, 0.0, 0.0],
            "motion": "static",
        },
        "random_matrix": {
            "kin_mean": [1.0, 1.0, 0.0, 0.0],
            "kin_cov": [1.0, 1.0, 0.0, 0.0],
            "Q_r": [0.0, 0.0, 0.0, 0.0],
            "extent_params": [0.0, 2.0, 12.0],
            "v": 56.0,
            "tau": None,
            "motion": "static",
        },
    },
    # Constant speed through waypoints with three turns; fixed semi-axes.
    "cv_turns_iv_b": {
        "name": "cv_turns_iv_b",
        "kind": "cv_waypoints",
        "T": 10.0,
        "speed_mps": _V_CV,
        "waypoints": [[0.0, 0.0], [4000.0, 0.0], [6000.0, 2000.0], [6000.0, 4500.0], [4000.0, 6500.0]],
        "axes": [170.0, 40.0],
        "alpha0": 0.0,
        "poisson_mean": 20.0,
        "meas_noise_var": [10000.0, 400.0],
        "seed": 20190201,
        "memekf": {
            "kin_mean": [0.0, 0.0, _V_CV, 0.0],
            "kin_cov": [900.0, 900.0, 16.0, 16.0],
            "shape_mean": [0.0, 200.0, 90.0],
            "shape_cov": [1.0, 70.0**2, 70.0**2],
            "Q_r": [100.0, 100.0, 1.0, 1.0],
            "Q_p": [0.1, 1.0, 1.0],
            "motion": "cv",
        },
        "random_matrix": {
            "kin_mean": [0.0, 0.0, _V_CV, 0.0],
            "kin_cov": [900.0, 900.0, 16.0, 16.0],
            "Q_r": [100.0, 100.0, 1.0, 1.0],
            "extent_params": [0.0, 200.0, 90.0],
            "v": 56.0,
            "tau": 50.0,
            "motion": "cv",
        },
    },
    # Variable turn rate: 25 CV steps, ramp to 20 deg/s over 20 steps, back over 20, 5 CV steps.
    "variable_turn_iv_c": {
        "name": "variable_turn_iv_c",
        "kind": "variable_turn",
        "T": 1.0,
        "speed_mps": 150.0,
        "axes": [85.0, 20.0],
        "alpha0": _HEADING_TURN,
        "center0": [100.0, 100.0],
        "poisson_mean": 20.0,
        "meas_noise_var": [10000.0, 400.0],
        "seed": 20190301,
        "turn": {"cv_steps": 25, "ramp_up_steps": 20, "ramp_down_steps": 20, "cv_tail_steps": 5,
                 "max_turn_rate_deg": 20.0},
        "memekf": {
            "kin_mean": [100.0, 100.0, 100.0, 20.0, 0.001],
            "kin_cov": [1600.0, 1600.0, 16.0, 16.0, 0.001],
            "shape_mean": [math.pi / 3, 200.0, 90.0],
            "shape_cov": [0.2, 360.0, 360.0],
            "Q_r": [1000.0, 1000.0, 100.0, 100.0, 0.001],
            "Q_p": [0.01, 1.0, 1.0],
            "motion": "ct",
            "variants": {"2": {"Q_p": [0.1, 40.0, 40.0]}},
        },
        "random_matrix": {
            "kin_mean": [100.0, 100.0, 100.0, 20.0],
            "kin_cov": [1600.0, 1600.0, 16.0, 16.0],
            "Q_r": [1000.0, 1000.0, 100.0, 100.0],
            "extent_params": [math.pi / 3, 200.0, 90.0],
            "v": 56.0,
            "tau": 5.0,
            "motion": "cv",
        },
    },
}
