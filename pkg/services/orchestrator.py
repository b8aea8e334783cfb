"""Orchestration layer: runs one experiment command, writes its report and CSV series."""
from __future__ import annotations

import logging
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from config import APP_VERSION, REPORT_SCHEMA_VERSION
from lab.constructions import (
    build_uk,
    extract_eta_sets,
    scan_eta,
    simulate_orbit,
    synthesize_finite_horizon,
)
from lab.criteria import (
    check_theorem31_condition2,
    check_theorem_A,
    default_test_suite,
    probe_d_transitivity,
    verify_dhc_criterion,
)
from lab.funcspace import LatticeFunction
from lab.group_lattice import CompactRegion, Horizon, aperiodicity_horizon, classify_element, region_meets_translate
from services.codec import dict_to_function, dict_to_region, function_to_dict
from services.config_schema import ExperimentConfig
from storage import emit_series, ensure_out_dir_ready, write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

# Outcome statuses that map to exit code 2.
NEGATIVE_STATUSES = frozenset({"Refuted", "BudgetExhausted", "Exhausted", "PremiseViolated", "Failed"})

WITNESS_COLUMNS = ["k", "n_k", "eps_k", "deficit", "sup_forward", "sup_backward", "sup_ratio"]


def exit_code_for(status: str) -> int:
    return EXIT_NEGATIVE if status in NEGATIVE_STATUSES else EXIT_OK


class CommandOutcome:
    """Status, result payload and named CSV series of one command."""

    def __init__(self, status: str, result: dict[str, Any], series: Optional[dict[str, tuple[list[str], list[list[Any]]]]] = None):
        self.status = status
        self.result = result
        self.series = series or {}


def _witness_rows(verdict_dict: dict[str, Any]) -> list[list[Any]]:
    if "witness" in verdict_dict:
        entries = verdict_dict["witness"]
        return [[e["k"], e["n_k"], e["eps_k"], e["deficit"], e["sup_forward"], e["sup_backward"], e["sup_ratio"]] for e in entries]
    rows = []
    for d in verdict_dict.get("diagnostics", []):
        rows.append([d["k"], d.get("best_n"), d["eps_k"], d.get("best_deficit"), d.get("sup_forward"), d.get("sup_backward"), d.get("sup_ratio")])
    return rows


def _orbit_rows(series: dict[str, Any]) -> list[list[Any]]:
    return [[r["n"], r["d_n"], *r["per_l"]] for r in series["rows"]]


def _orbit_columns(N: int) -> list[str]:
    return ["n", "d_n"] + [f"d_n_l{l}" for l in range(1, N + 1)]


class ExperimentOrchestrator:
    """
    Runs experiment commands:
    1. Decode the command payload (functions, regions) from the validated config
    2. Call the lab routine for the command
    3. Assemble the report, write report.json and any CSV series into the run directory
    """

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self._rng = cfg.rng()

    def _fn(self, data: Any) -> LatticeFunction:
        if isinstance(data, dict) and set(data) == {"from_construct"}:
            return self._construct(data["from_construct"]).u
        return dict_to_function(self.cfg.model, data, self._rng)

    def _fns(self, items: list[Any]) -> list[LatticeFunction]:
        return [self._fn(item) for item in items]

    def _construct(self, body: dict[str, Any]):
        cfg = self.cfg
        f = self._fn(body["f"])
        targets = self._fns(body["targets"])
        if "E" in body:
            E = dict_to_region(cfg.model, body["E"])
        else:
            E = CompactRegion()
            for g in [f, *targets]:
                E = E.union(g.support())
        return build_uk(f, targets, cfg.weights, cfg.a, body["n"], E, cfg.p, powers=cfg.powers, eps=body.get("eps"), K=cfg.K)

    def run_aperiodicity(self) -> CommandOutcome:
        cfg = self.cfg
        K = cfg.K
        element = classify_element(cfg.model, cfg.a)
        hz = aperiodicity_horizon(cfg.model, K, cfg.a)
        if not isinstance(hz, Horizon):
            return CommandOutcome("Periodic", {"element": element, "reason": hz.reason})
        N = hz.N
        up_to = cfg.payload["verify_up_to"]
        disjoint = all(
            not region_meets_translate(cfg.model, K, cfg.a, s * n)
            for n in range(N + 1, N + up_to + 1)
            for s in (1, -1)
        )
        minimal = N == 0 or region_meets_translate(cfg.model, K, cfg.a, N)
        return CommandOutcome(
            "Horizon",
            {
                "element": element,
                "horizon": N,
                "verified_range": [N + 1, N + up_to],
                "disjoint_beyond_horizon": disjoint,
                "minimal": minimal,
            },
        )

    def run_check_hc(self) -> CommandOutcome:
        cfg = self.cfg
        verdicts = []
        series = {}
        for idx, w in enumerate(cfg.weights):
            verdict = check_theorem_A(w, cfg.a, cfg.K, cfg.schedule, cfg.p, model=cfg.model).to_dict()
            verdicts.append(verdict)
            series[f"witness_l{idx + 1}"] = (WITNESS_COLUMNS, _witness_rows(verdict))
        statuses = {v["status"] for v in verdicts}
        status = "Satisfied" if statuses == {"Satisfied"} else ("Refuted" if "Refuted" in statuses else "BudgetExhausted")
        return CommandOutcome(status, {"verdicts": verdicts, "schedule": cfg.schedule.to_dict()}, series)

    def run_check_dhc(self) -> CommandOutcome:
        cfg = self.cfg
        verdict = check_theorem31_condition2(
            cfg.weights, cfg.a, cfg.K, cfg.schedule, cfg.p, mode=cfg.mode, pairs=cfg.pairs or None, model=cfg.model
        ).to_dict()
        return CommandOutcome(
            verdict["status"],
            {"verdict": verdict, "schedule": cfg.schedule.to_dict()},
            {"witness": (WITNESS_COLUMNS, _witness_rows(verdict))},
        )

    def run_dcriterion(self) -> CommandOutcome:
        cfg = self.cfg
        payload = cfg.payload
        if "X0" in payload:
            X0 = self._fns(payload["X0"])
            Xl = [self._fns(suite) for suite in payload["Xl"]]
        else:
            suite = default_test_suite(cfg.model, payload["suite_radius"])
            X0, Xl = suite, [suite for _ in cfg.weights]
        report = verify_dhc_criterion(cfg.ops, payload["n_seq"], X0, Xl, cfg.p, payload["tol"])
        rows = [[r["k"], r["n"], r["term_i"], r["term_ii"], r["term_iii"]] for r in report.rows]
        return CommandOutcome(
            report.status, report.to_dict(), {"dcriterion": (["k", "n", "term_i", "term_ii", "term_iii"], rows)}
        )

    def run_probe(self) -> CommandOutcome:
        cfg = self.cfg
        targets = self._fns(cfg.payload["targets"])
        outcome = probe_d_transitivity(cfg.ops, targets, cfg.payload["eps"], cfg.payload["n_max"], cfg.p)
        return CommandOutcome(outcome.status, outcome.to_dict())

    def run_construct(self) -> CommandOutcome:
        report = self._construct(self.cfg.payload)
        result = report.to_dict()
        result["u"] = function_to_dict(report.u)
        return CommandOutcome("ok", result)

    def run_extract(self) -> CommandOutcome:
        cfg = self.cfg
        payload = cfg.payload
        f = self._fn(payload["f"])
        if "eta" in payload:
            decomposition = extract_eta_sets(f, cfg.weights, cfg.a, payload["m"], cfg.K, payload["eta"], cfg.p)
        else:
            decomposition = scan_eta(f, cfg.weights, cfg.a, payload["m"], cfg.K, cfg.p)
            if decomposition is None:
                decomposition = extract_eta_sets(f, cfg.weights, cfg.a, payload["m"], cfg.K, 0.5, cfg.p)
        return CommandOutcome(decomposition.status, decomposition.to_dict())

    def run_synthesize(self) -> CommandOutcome:
        cfg = self.cfg
        payload = cfg.payload
        tuples = [self._fns(tup) for tup in payload["tuples"]]
        outcome = synthesize_finite_horizon(cfg.ops, tuples, payload["eps"], payload["budget"], cfg.p)
        result = outcome.to_dict()
        series = {}
        if outcome.status == "Success":
            result["u"] = function_to_dict(outcome.u)
            n_max = payload["orbit_n_max"] or outcome.times[-1] + 10
            confirmed = []
            for j, (m, tup) in enumerate(zip(outcome.times, tuples)):
                orbit = simulate_orbit(cfg.ops, outcome.u, tup, cfg.p, n_max, eps=payload["eps"])
                confirmed.append(m in orbit.visits)
                series[f"orbit_tuple{j + 1}"] = (_orbit_columns(len(cfg.ops)), _orbit_rows(orbit.to_dict()))
            result["orbit_confirmed"] = confirmed
        return CommandOutcome(outcome.status, result, series)

    def run_orbit(self) -> CommandOutcome:
        cfg = self.cfg
        payload = cfg.payload
        u = self._fn(payload["u"])
        targets = self._fns(payload["targets"])
        orbit = simulate_orbit(cfg.ops, u, targets, cfg.p, payload["n_max"], eps=payload.get("eps"))
        data = orbit.to_dict()
        return CommandOutcome(
            "ok", {"eps": data["eps"], "visits": data["visits"]}, {"orbit": (_orbit_columns(len(cfg.ops)), _orbit_rows(data))}
        )

    def run(self, out_dir: Optional[Path] = None) -> dict[str, Any]:
        """Dispatch the configured command; write report.json and series CSVs; return the report."""
        cfg = self.cfg
        handlers = {
            "aperiodicity": self.run_aperiodicity,
            "check-hc": self.run_check_hc,
            "check-dhc": self.run_check_dhc,
            "dcriterion": self.run_dcriterion,
            "probe": self.run_probe,
            "construct": self.run_construct,
            "extract": self.run_extract,
            "synthesize": self.run_synthesize,
            "orbit": self.run_orbit,
        }
        out = ensure_out_dir_ready(out_dir)
        logger.info("Running %s (seed=%d) into %s", cfg.command, cfg.seed, out)
        started = time.perf_counter()
        outcome = handlers[cfg.command]()
        elapsed = time.perf_counter() - started

        series_files = {}
        for name, (columns, rows) in sorted(outcome.series.items()):
            path = emit_series(rows, columns, out / f"{name}.csv")
            series_files[name] = path.name
        exit_code = exit_code_for(outcome.status)
        report = {
            "version": REPORT_SCHEMA_VERSION,
            "app_version": APP_VERSION,
            "command": cfg.command,
            "config": cfg.normalized,
            "status": outcome.status,
            "exit_code": exit_code,
            "result": outcome.result,
            "series": series_files,
            "timing": {
                "generated_at": datetime.now(timezone.utc).isoformat(),
                "wall_clock_seconds": elapsed,
            },
        }
        write_report(out, report)
        logger.info("%s finished: %s (exit %d, %.2fs)", cfg.command, outcome.status, exit_code, elapsed)
        return report
