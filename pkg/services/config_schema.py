"""Experiment config validation: defaults, cross-references and aggregated errors.

Every problem is collected as {"path": <JSON pointer>, "message": ...}; validation never
stops at the first one. The normalized dict has every default written out, so validating
it again yields the same config.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from config import DEFAULT_K_MAX, DEFAULT_N_MAX, DEFAULT_P
from lab.criteria import ConditionMode, WitnessSchedule
from lab.errors import ConfigValidationError, HyperlabError
from lab.funcspace import NormParam
from lab.group_lattice import CompactRegion, GroupModel, GroupPoint, Horizon, aperiodicity_horizon, classify_element, haar_measure
from lab.translation_ops import OperatorSpec
from lab.weights import WeightSpec
from services.codec import (
    dict_to_function,
    dict_to_model,
    dict_to_point,
    dict_to_region,
    dict_to_weight,
    model_to_dict,
    point_to_list,
    region_to_dict,
    weight_to_dict,
)

logger = logging.getLogger(__name__)

COMMANDS = (
    "aperiodicity",
    "check-hc",
    "check-dhc",
    "dcriterion",
    "probe",
    "construct",
    "extract",
    "synthesize",
    "orbit",
)
# Commands whose statements presuppose an aperiodic translation element.
CRITERION_COMMANDS = frozenset({"check-hc", "check-dhc", "dcriterion", "probe", "extract"})
COMMANDS_NEEDING_K = frozenset({"aperiodicity", "check-hc", "check-dhc", "extract"})
COMMANDS_WITH_SCHEDULE = frozenset({"check-hc", "check-dhc"})
MIN_WEIGHTS = {"check-hc": 1, "check-dhc": 2, "dcriterion": 2, "probe": 1, "construct": 1, "extract": 1, "synthesize": 1, "orbit": 1}


@dataclass
class ExperimentConfig:
    command: str
    model: GroupModel
    a: GroupPoint
    p: float
    weights: list[WeightSpec]
    powers: list[int]
    K: Optional[CompactRegion]
    schedule: Optional[WitnessSchedule]
    mode: ConditionMode
    pairs: list[tuple[int, int]]
    seed: int
    payload: dict[str, Any]
    normalized: dict[str, Any] = field(default_factory=dict)

    @property
    def ops(self) -> list[OperatorSpec]:
        return [OperatorSpec(a=self.a, w=w, r=r) for w, r in zip(self.weights, self.powers)]

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def serialize_config(cfg: ExperimentConfig) -> dict[str, Any]:
    return dict(cfg.normalized)


class _Errors:
    def __init__(self) -> None:
        self.items: list[dict[str, str]] = []

    def add(self, path: str, message: str) -> None:
        self.items.append({"path": path, "message": message})

    def attempt(self, path: str, fn: Callable[[], Any]) -> Any:
        """Run a decoder; record its failure under path and return None."""
        try:
            return fn()
        except (HyperlabError, ValueError, TypeError, KeyError) as e:
            self.add(path, str(e) or type(e).__name__)
            return None


def _int_field(errors: _Errors, raw: dict, key: str, path: str, default: Optional[int] = None, minimum: int = 0) -> Optional[int]:
    value = raw.get(key, default)
    if value is None:
        errors.add(f"{path}/{key}", "required")
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        errors.add(f"{path}/{key}", f"must be an integer, got {value!r}")
        return None
    if value < minimum:
        errors.add(f"{path}/{key}", f"must be >= {minimum}, got {value}")
        return None
    return value


def _positive_float(errors: _Errors, raw: dict, key: str, path: str, default: Optional[float] = None) -> Optional[float]:
    value = raw.get(key, default)
    if value is None:
        errors.add(f"{path}/{key}", "required")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        errors.add(f"{path}/{key}", f"must be a positive number, got {value!r}")
        return None
    return float(value)


def _check_function(errors: _Errors, model: GroupModel, data: Any, path: str, rng: np.random.Generator) -> None:
    if isinstance(data, dict) and set(data) == {"from_construct"}:
        _check_construct_payload(errors, model, data["from_construct"], f"{path}/from_construct", rng)
        return
    errors.attempt(path, lambda: dict_to_function(model, data, rng))


def _check_function_list(errors: _Errors, model: GroupModel, data: Any, path: str, rng: np.random.Generator, length: Optional[int] = None) -> None:
    if not isinstance(data, list):
        errors.add(path, "must be a list of function payloads")
        return
    if length is not None and len(data) != length:
        errors.add(path, f"expected {length} functions, got {len(data)}")
    for i, item in enumerate(data):
        _check_function(errors, model, item, f"{path}/{i}", rng)


def _check_construct_payload(errors: _Errors, model: GroupModel, body: Any, path: str, rng: np.random.Generator, n_weights: Optional[int] = None) -> None:
    if not isinstance(body, dict):
        errors.add(path, "must be an object")
        return
    if "f" not in body:
        errors.add(f"{path}/f", "required")
    else:
        _check_function(errors, model, body["f"], f"{path}/f", rng)
    _check_function_list(errors, model, body.get("targets"), f"{path}/targets", rng, n_weights)
    _int_field(errors, body, "n", path)
    if "E" in body:
        errors.attempt(f"{path}/E", lambda: dict_to_region(model, body["E"]))
    if "eps" in body:
        _positive_float(errors, body, "eps", path)


def _check_payload(errors: _Errors, command: str, model: GroupModel, payload: dict, N: int, rng: np.random.Generator) -> dict:
    """Validate the command-specific payload and return it with defaults filled in."""
    out = dict(payload)
    path = "/payload"
    if command == "aperiodicity":
        out["verify_up_to"] = _int_field(errors, payload, "verify_up_to", path, default=100, minimum=0)
    elif command == "dcriterion":
        n_seq = payload.get("n_seq")
        if not isinstance(n_seq, list) or not n_seq or not all(isinstance(n, int) and not isinstance(n, bool) for n in n_seq):
            errors.add(f"{path}/n_seq", "must be a nonempty list of integers")
        elif any(b <= a for a, b in zip(n_seq, n_seq[1:])) or n_seq[0] < 0:
            errors.add(f"{path}/n_seq", "must be increasing and nonnegative")
        out["tol"] = _positive_float(errors, payload, "tol", path, default=1e-6)
        if "X0" in payload or "Xl" in payload:
            _check_function_list(errors, model, payload.get("X0"), f"{path}/X0", rng)
            xl = payload.get("Xl")
            if not isinstance(xl, list) or len(xl) != N:
                errors.add(f"{path}/Xl", f"must hold one suite per operator ({N})")
            else:
                for i, suite in enumerate(xl):
                    _check_function_list(errors, model, suite, f"{path}/Xl/{i}", rng)
        else:
            out["suite_radius"] = _int_field(errors, payload, "suite_radius", path, default=5)
    elif command == "probe":
        _check_function_list(errors, model, payload.get("targets"), f"{path}/targets", rng, N + 1)
        out["eps"] = _positive_float(errors, payload, "eps", path, default=0.1)
        out["n_max"] = _int_field(errors, payload, "n_max", path, default=500, minimum=1)
    elif command == "construct":
        _check_construct_payload(errors, model, payload, path, rng, N)
    elif command == "extract":
        if "f" not in payload:
            errors.add(f"{path}/f", "required")
        else:
            _check_function(errors, model, payload["f"], f"{path}/f", rng)
        out["m"] = _int_field(errors, payload, "m", path, minimum=1)
        if "eta" in payload:
            eta = payload["eta"]
            if isinstance(eta, bool) or not isinstance(eta, (int, float)) or not 0 < eta < 1:
                errors.add(f"{path}/eta", f"must lie in (0, 1), got {eta!r}")
        else:
            out["scan_eta"] = True
    elif command == "synthesize":
        tuples = payload.get("tuples")
        if not isinstance(tuples, list) or not tuples:
            errors.add(f"{path}/tuples", "must be a nonempty list of target tuples")
        else:
            for j, tup in enumerate(tuples):
                _check_function_list(errors, model, tup, f"{path}/tuples/{j}", rng, N)
        out["eps"] = _positive_float(errors, payload, "eps", path, default=0.1)
        out["budget"] = _int_field(errors, payload, "budget", path, default=2000, minimum=1)
        out["orbit_n_max"] = _int_field(errors, payload, "orbit_n_max", path, default=0, minimum=0)
    elif command == "orbit":
        if "u" not in payload:
            errors.add(f"{path}/u", "required")
        else:
            _check_function(errors, model, payload["u"], f"{path}/u", rng)
        _check_function_list(errors, model, payload.get("targets"), f"{path}/targets", rng, N)
        out["n_max"] = _int_field(errors, payload, "n_max", path, default=100, minimum=1)
        if "eps" in payload:
            _positive_float(errors, payload, "eps", path)
    return out


def validate_config(raw: Any, command: Optional[str] = None, mode: Optional[str] = None, seed: Optional[int] = None) -> ExperimentConfig:
    """Normalize a raw config dict. Raises ConfigValidationError listing every problem.

    command, mode and seed given on the command line take precedence over the file.
    """
    errors = _Errors()
    if not isinstance(raw, dict):
        raise ConfigValidationError([{"path": "", "message": "config must be a JSON object"}])

    command = command or raw.get("command")
    if command not in COMMANDS:
        errors.add("/command", f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")

    model = errors.attempt("/model", lambda: dict_to_model(raw.get("model", {})))
    if model is None:
        raise ConfigValidationError(errors.items)

    a = errors.attempt("/a", lambda: dict_to_point(model, raw["a"])) if "a" in raw else None
    if "a" not in raw:
        errors.add("/a", "required")

    p_raw = raw.get("p", DEFAULT_P)
    p = errors.attempt("/p", lambda: NormParam(float(p_raw)).p)

    weights_raw = raw.get("weights", [])
    weights: list[WeightSpec] = []
    if not isinstance(weights_raw, list):
        errors.add("/weights", "must be a list")
        weights_raw = []
    for i, w in enumerate(weights_raw):
        decoded = errors.attempt(f"/weights/{i}", lambda w=w: dict_to_weight(w, model.dim))
        if decoded is not None:
            weights.append(decoded)
    N = len(weights_raw)
    need = MIN_WEIGHTS.get(command or "", 0)
    if N < need:
        errors.add("/weights", f"command {command} needs at least {need} weight(s), got {N}")

    powers = raw.get("powers", [1] * N)
    if not isinstance(powers, list) or len(powers) != N or not all(isinstance(r, int) and not isinstance(r, bool) and r >= 1 for r in powers):
        errors.add("/powers", f"must be {N} integers >= 1")
        powers = [1] * N

    K = None
    if "K" in raw:
        K = errors.attempt("/K", lambda: dict_to_region(model, raw["K"]))
        if K is not None and K.is_empty():
            errors.add("/K", "K must be nonempty")
            K = None
    elif command in COMMANDS_NEEDING_K:
        errors.add("/K", f"command {command} needs the compact region K")

    if command in CRITERION_COMMANDS and a is not None:
        kind = classify_element(model, a)
        if kind["kind"] != "aperiodic":
            errors.add("/a", f"aperiodic element required: a = {list(a)} is periodic on {model.kind.value} (torsion order {kind['torsion_order']})")
        elif K is not None and not isinstance(aperiodicity_horizon(model, K, a), Horizon):
            errors.add("/a", "aperiodic element required")

    mode_raw = mode or raw.get("mode", ConditionMode.PAPER_LITERAL.value)
    mode_value = errors.attempt("/mode", lambda: ConditionMode(mode_raw))
    pairs: list[tuple[int, int]] = []
    for i, pr in enumerate(raw.get("pairs", [])):
        if not (isinstance(pr, list) and len(pr) == 2 and all(isinstance(v, int) for v in pr) and pr[0] != pr[1] and all(1 <= v <= N for v in pr)):
            errors.add(f"/pairs/{i}", f"must be an ordered pair [j, l] of distinct weight indices in 1..{N}")
        else:
            pairs.append((pr[0], pr[1]))
    if command == "check-dhc" and mode_value is ConditionMode.ONE_DIRECTIONAL and not pairs:
        errors.add("/pairs", "one-directional mode needs at least one ordered pair")

    seed_value = seed if seed is not None else raw.get("seed", 0)
    if isinstance(seed_value, bool) or not isinstance(seed_value, int) or seed_value < 0:
        errors.add("/seed", f"must be a nonnegative integer, got {seed_value!r}")
        seed_value = 0

    schedule = None
    sched_raw = raw.get("schedule", {})
    if command in COMMANDS_WITH_SCHEDULE and K is not None and p is not None:
        if not isinstance(sched_raw, dict):
            errors.add("/schedule", "must be an object")
            sched_raw = {}
        k_max = _int_field(errors, sched_raw, "k_max", "/schedule", default=len(sched_raw.get("eps", [])) or DEFAULT_K_MAX, minimum=1)
        n_max = _int_field(errors, sched_raw, "n_max", "/schedule", default=DEFAULT_N_MAX, minimum=1)
        if k_max is not None and n_max is not None:
            default = WitnessSchedule.default(haar_measure(model, K), p, k_max=k_max, n_max=n_max)
            schedule = errors.attempt(
                "/schedule",
                lambda: WitnessSchedule(
                    eps=tuple(sched_raw.get("eps", default.eps)),
                    deficit=tuple(sched_raw.get("deficit", default.deficit)),
                    n_max=n_max,
                ),
            )
            if schedule is not None and schedule.k_max != k_max:
                errors.add("/schedule/k_max", f"k_max = {k_max} but {schedule.k_max} tolerances given")

    payload_raw = raw.get("payload", {})
    if not isinstance(payload_raw, dict):
        errors.add("/payload", "must be an object")
        payload_raw = {}
    payload = payload_raw
    if command in COMMANDS:
        payload = _check_payload(errors, command, model, payload_raw, N, np.random.default_rng(seed_value))

    if errors.items:
        logger.warning("Config rejected with %d error(s)", len(errors.items))
        raise ConfigValidationError(errors.items)

    normalized = {
        "command": command,
        "model": model_to_dict(model),
        "a": point_to_list(a),
        "p": p,
        "weights": [weight_to_dict(w) for w in weights],
        "powers": list(powers),
        "mode": mode_value.value,
        "pairs": [list(pr) for pr in pairs],
        "seed": seed_value,
        "payload": payload,
    }
    if K is not None:
        normalized["K"] = region_to_dict(K)
    if schedule is not None:
        normalized["schedule"] = schedule.to_dict()
    return ExperimentConfig(
        command=command,
        model=model,
        a=a,
        p=p,
        weights=weights,
        powers=list(powers),
        K=K,
        schedule=schedule,
        mode=mode_value,
        pairs=pairs,
        seed=seed_value,
        payload=payload,
        normalized=normalized,
    )
