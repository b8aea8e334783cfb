"""Executable checkers for hypercyclicity and disjoint hypercyclicity of weighted translations.

The searches return a Verdict: Satisfied with a witness (n_k, E_k) that has been re-verified
with the scalar product routines, Refuted with a structural certificate, or BudgetExhausted
with per-k diagnostics. A budget running out is never a refutation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence, Union

import numpy as np

from config import DEFAULT_K_MAX, DEFAULT_N_MAX, IDENTITY_TOL
from lab.constructions import build_uk
from lab.errors import (
    EmptyRegionError,
    InternalConsistencyError,
    InvalidParameterError,
    ModelMismatchError,
    PeriodicElementError,
)
from lab.funcspace import LatticeFunction, NormParam, as_p, indicator, lp_distance, lp_norm
from lab.group_lattice import (
    CompactRegion,
    GroupModel,
    Horizon,
    PointLike,
    aperiodicity_horizon,
    classify_element,
    haar_measure,
)
from lab.translation_ops import OperatorSpec, apply_TS_power
from lab.weights import (
    BackwardInv,
    ConstantWeight,
    Forward,
    ProductSelector,
    Ratio,
    WeightSpec,
    product_at,
    product_table,
)

logger = logging.getLogger(__name__)

# Admissibility is decided in the log domain with this margin below log ε_k, so the
# strict inequalities survive re-verification with the scalar routines.
SEARCH_MARGIN = 1e-9


class ConditionMode(str, Enum):
    PAPER_LITERAL = "paper"
    ONE_DIRECTIONAL = "one-directional"


@dataclass(frozen=True)
class WitnessSchedule:
    """Tolerances ε_k and allowed measure deficits δ_k for k = 1..k_max."""

    eps: tuple[float, ...]
    deficit: tuple[float, ...]
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        object.__setattr__(self, "deficit", tuple(float(d) for d in self.deficit))
        if not self.eps:
            raise InvalidParameterError("the schedule needs at least one ε_k")
        if len(self.eps) != len(self.deficit):
            raise InvalidParameterError(f"{len(self.eps)} tolerances for {len(self.deficit)} deficits")
        if any(e <= 0 or not math.isfinite(e) for e in self.eps):
            raise InvalidParameterError(f"tolerances must be positive and finite: {self.eps}")
        if any(b > a for a, b in zip(self.eps, self.eps[1:])):
            raise InvalidParameterError(f"tolerances must be nonincreasing: {self.eps}")
        if any(d < 0 for d in self.deficit):
            raise InvalidParameterError(f"deficits must be nonnegative: {self.deficit}")
        if any(b > a for a, b in zip(self.deficit, self.deficit[1:])):
            raise InvalidParameterError(f"deficits must be nonincreasing: {self.deficit}")
        if self.n_max < 1:
            raise InvalidParameterError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def k_max(self) -> int:
        return len(self.eps)

    @classmethod
    def default(
        cls, measure_K: float, p: Union[float, NormParam] = 2.0, k_max: int = DEFAULT_K_MAX, n_max: int = DEFAULT_N_MAX
    ) -> "WitnessSchedule":
        """ε_k = 2^{-k}, δ_k = λ(K)·k^{-p}."""
        pv = as_p(p)
        if k_max < 1:
            raise InvalidParameterError(f"k_max must be >= 1, got {k_max}")
        ks = range(1, k_max + 1)
        return cls(
            eps=tuple(2.0**-k for k in ks),
            deficit=tuple(measure_K * k**-pv for k in ks),
            n_max=n_max,
        )

    def to_dict(self) -> dict[str, Any]:
        return {"eps": list(self.eps), "deficit": list(self.deficit), "n_max": self.n_max, "k_max": self.k_max}


@dataclass(frozen=True)
class WitnessEntry:
    k: int
    n: int
    E: CompactRegion
    eps: float
    deficit_bound: float
    deficit: float
    sup_forward: Optional[float] = None
    sup_backward: Optional[float] = None
    sup_ratio: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "n_k": self.n,
            "E_k": [list(c) for c in self.E.sorted_cells()],
            "eps_k": self.eps,
            "deficit_bound": self.deficit_bound,
            "deficit": self.deficit,
            "sup_forward": self.sup_forward,
            "sup_backward": self.sup_backward,
            "sup_ratio": self.sup_ratio,
        }


@dataclass(frozen=True)
class WitnessSequence:
    entries: tuple[WitnessEntry, ...]

    def __post_init__(self) -> None:
        ns = [e.n for e in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InternalConsistencyError(f"witness times must increase strictly: {ns}")

    @property
    def times(self) -> list[int]:
        return [e.n for e in self.entries]

    def to_dict(self) -> list[dict[str, Any]]:
        return [e.to_dict() for e in self.entries]


@dataclass
class Satisfied:
    witness: WitnessSequence
    details: dict[str, Any] = field(default_factory=dict)

    status = "Satisfied"

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "witness": self.witness.to_dict(), "details": self.details}


@dataclass
class Refuted:
    certificate: dict[str, Any]
    details: dict[str, Any] = field(default_factory=dict)

    status = "Refuted"

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "certificate": self.certificate, "details": self.details}


@dataclass
class BudgetExhausted:
    diagnostics: list[dict[str, Any]]
    details: dict[str, Any] = field(default_factory=dict)

    status = "BudgetExhausted"

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "diagnostics": self.diagnostics, "details": self.details}


Verdict = Union[Satisfied, Refuted, BudgetExhausted]


@dataclass(frozen=True)
class _Constraint:
    family: str  # forward | backward | ratio
    label: Any
    selector: ProductSelector


def _require_aperiodic(model: GroupModel, K: CompactRegion, a: PointLike) -> Horizon:
    if K.is_empty():
        raise EmptyRegionError("the compact region K must be nonempty")
    hz = aperiodicity_horizon(model, K, a)
    if not isinstance(hz, Horizon):
        raise PeriodicElementError(f"aperiodic element required: {hz.reason}")
    return hz


def _single_constraints(weights: Sequence[WeightSpec]) -> list[_Constraint]:
    out = []
    for idx, w in enumerate(weights):
        out.append(_Constraint("forward", idx + 1, Forward(w)))
        out.append(_Constraint("backward", idx + 1, BackwardInv(w)))
    return out


def _sups(tables: list[np.ndarray], constraints: list[_Constraint], rows: np.ndarray, col: int) -> dict[str, Optional[float]]:
    out: dict[str, Optional[float]] = {"forward": None, "backward": None, "ratio": None}
    if not rows.any():
        return out
    for tab, c in zip(tables, constraints):
        v = math.exp(float(tab[rows, col].max()))
        out[c.family] = v if out[c.family] is None else max(out[c.family], v)
    return out


def _greedy_search(
    model: GroupModel,
    a: PointLike,
    K: CompactRegion,
    constraints: list[_Constraint],
    sched: WitnessSchedule,
) -> Union[WitnessSequence, list[dict[str, Any]]]:
    """Smallest admissible n per k with the maximal admissible E ⊆ K.

    Returns the witness, or the per-k diagnostics when the budget runs out.
    """
    cells = K.sorted_cells()
    vol = model.cell_volume
    tables = [product_table(model, c.selector, a, K, sched.n_max) for c in constraints]
    entries: list[WitnessEntry] = []
    diagnostics: list[dict[str, Any]] = []
    n_prev = 0
    for k, (eps_k, delta_k) in enumerate(zip(sched.eps, sched.deficit), start=1):
        if n_prev >= sched.n_max:
            diagnostics.append({"k": k, "eps_k": eps_k, "deficit_bound": delta_k, "reason": "no n left in budget"})
            return diagnostics
        bound = math.log(eps_k) - SEARCH_MARGIN
        ok = np.ones((len(cells), sched.n_max - n_prev), dtype=bool)
        for tab in tables:
            ok &= tab[:, n_prev + 1 :] < bound
        missing = (len(cells) - ok.sum(axis=0)) * vol
        feasible = np.nonzero(missing <= delta_k)[0]
        if feasible.size == 0:
            best = int(np.argmin(missing))
            sups = _sups(tables, constraints, ok[:, best], n_prev + 1 + best)
            diagnostics.append(
                {
                    "k": k,
                    "eps_k": eps_k,
                    "deficit_bound": delta_k,
                    "best_n": n_prev + 1 + best,
                    "best_deficit": float(missing[best]),
                    **{f"sup_{fam}": v for fam, v in sups.items()},
                }
            )
            logger.debug("witness search: no admissible n for k=%d (best deficit %.4g)", k, missing[best])
            return diagnostics
        idx = int(feasible[0])
        n = n_prev + 1 + idx
        rows = ok[:, idx]
        E = CompactRegion(frozenset(c for c, keep in zip(cells, rows) if keep))
        sups = _sups(tables, constraints, rows, n)
        entry = WitnessEntry(
            k=k,
            n=n,
            E=E,
            eps=eps_k,
            deficit_bound=delta_k,
            deficit=float(missing[idx]),
            sup_forward=sups["forward"],
            sup_backward=sups["backward"],
            sup_ratio=sups["ratio"],
        )
        entries.append(entry)
        diagnostics.append({"k": k, "eps_k": eps_k, "deficit_bound": delta_k, "best_n": n, "best_deficit": entry.deficit, **{f"sup_{fam}": v for fam, v in sups.items()}})
        logger.debug("witness search: k=%d n_k=%d |E_k|=%d", k, n, len(E))
        n_prev = n
    return WitnessSequence(tuple(entries))


def reverify_witness(
    model: GroupModel,
    a: PointLike,
    K: CompactRegion,
    witness: WitnessSequence,
    selectors: Sequence[ProductSelector],
) -> None:
    """Recompute every product on (n_k, E_k) with the scalar routines; raise on any failure."""
    for entry in witness.entries:
        if not entry.E.issubset(K):
            raise InternalConsistencyError(f"E_{entry.k} is not contained in K")
        deficit = haar_measure(model, K.difference(entry.E))
        if deficit > entry.deficit_bound:
            raise InternalConsistencyError(f"deficit {deficit!r} exceeds δ_{entry.k} = {entry.deficit_bound!r}")
        for x in entry.E.sorted_cells():
            for sel in selectors:
                if not product_at(sel, a, x, entry.n, model).less_than(entry.eps):
                    raise InternalConsistencyError(f"{sel} at x={x}, n={entry.n} is not below ε_{entry.k}")


def _monotone_certificate(
    model: GroupModel, w: ConstantWeight, a: PointLike, K: CompactRegion, sched: WitnessSchedule
) -> dict[str, Any]:
    """c >= 1 keeps φ_n = c^n >= 1; c <= 1 keeps φ̃_n = c^{-n} >= 1."""
    blocked = []
    if w.c >= 1:
        blocked.append("forward")
    if w.c <= 1:
        blocked.append("backward")
    measure_K = haar_measure(model, K)
    blocking_k = next(
        (k for k, (e, d) in enumerate(zip(sched.eps, sched.deficit), start=1) if e <= 1 and d < measure_K), None
    )
    evidence = {}
    for fam in blocked:
        sel = Forward(w) if fam == "forward" else BackwardInv(w)
        evidence[f"min_log_{fam}"] = float(product_table(model, sel, a, K, sched.n_max)[:, 1:].min())
    return {
        "type": "MonotoneCertificate",
        "c": w.c,
        "blocked": blocked,
        "statement": "a constant weight c gives φ_n = c^n and φ̃_n = c^{-n}; one of them is >= 1 for every n and x, "
        "so no x is admissible once ε_k <= 1 and the deficit bound forces E_k to be nonempty",
        "blocking_k": blocking_k,
        "n_checked": sched.n_max,
        "evidence": evidence,
    }


def check_theorem_A(
    w: WeightSpec,
    a: PointLike,
    K: CompactRegion,
    sched: WitnessSchedule,
    p: Union[float, NormParam] = 2.0,
    model: Optional[GroupModel] = None,
) -> Verdict:
    """Hypercyclicity of T_{a,w}: find n_k and E_k ⊆ K with φ_{n_k}, φ̃_{n_k} < ε_k on E_k."""
    as_p(p)
    model = model or GroupModel.integer_lattice(len(next(iter(K.cells))) if not K.is_empty() else 1)
    hz = _require_aperiodic(model, K, a)
    details = {"horizon": hz.N, "weight": w.family}
    if isinstance(w, ConstantWeight):
        cert = _monotone_certificate(model, w, a, K, sched)
        if cert["blocking_k"] is not None:
            logger.info("single-weight check: constant weight c=%s refuted", w.c)
            return Refuted(cert, details)
    constraints = _single_constraints([w])
    found = _greedy_search(model, a, K, constraints, sched)
    if isinstance(found, list):
        logger.warning("single-weight witness search exhausted n_max=%d", sched.n_max)
        return BudgetExhausted(found, details)
    reverify_witness(model, a, K, found, [c.selector for c in constraints])
    logger.info("single-weight check satisfied, n_k=%s", found.times)
    return Satisfied(found, details)


def _reciprocal_certificate(
    model: GroupModel,
    weights: Sequence[WeightSpec],
    a: PointLike,
    K: CompactRegion,
    sched: WitnessSchedule,
    pairs: Sequence[tuple[int, int]],
) -> dict[str, Any]:
    """R^{(j,l)} R^{(l,j)} = 1 pointwise, checked for the given 1-based pairs, x ∈ K and n <= n_max.

    The certificate names the pair with the largest deviation from the identity (the first on ties).
    """
    worst, worst_pair = 0.0, pairs[0]
    for j, l in pairs:
        fwd = product_table(model, Ratio(weights[j - 1], weights[l - 1]), a, K, sched.n_max)
        bwd = product_table(model, Ratio(weights[l - 1], weights[j - 1]), a, K, sched.n_max)
        dev = float(np.abs(fwd + bwd).max())
        if dev > worst:
            worst, worst_pair = dev, (j, l)
    if worst > IDENTITY_TOL:
        raise InternalConsistencyError(f"reciprocal ratio identity broken by {worst!r}")
    measure_K = haar_measure(model, K)
    blocking_k = next(
        (k for k, (e, d) in enumerate(zip(sched.eps, sched.deficit), start=1) if e < 1 and d < measure_K), None
    )
    first_small = next(k for k, e in enumerate(sched.eps, start=1) if e < 1)
    return {
        "type": "ReciprocalObstruction",
        "pair": list(worst_pair),
        "pairs_checked": [list(pr) for pr in pairs],
        "statement": "R^{(j,l)}(x)·R^{(l,j)}(x) = 1 pointwise, hence max of the two is >= 1 at every x, "
        "hence E must be empty while δ_k < λ(K)",
        "first_k_with_eps_below_one": first_small,
        "eps_k": sched.eps[first_small - 1],
        "blocking_k": blocking_k,
        "max_abs_log_sum": worst,
        "checked_points": len(K),
        "n_max": sched.n_max,
    }


def check_theorem31_condition2(
    weights: Sequence[WeightSpec],
    a: PointLike,
    K: CompactRegion,
    sched: WitnessSchedule,
    p: Union[float, NormParam] = 2.0,
    mode: Union[ConditionMode, str] = ConditionMode.PAPER_LITERAL,
    pairs: Optional[Sequence[tuple[int, int]]] = None,
    model: Optional[GroupModel] = None,
) -> Verdict:
    """Common witnesses (n_k, E_k) for the forward, backward and ratio products of N weights.

    In one-directional mode only the listed ordered pairs (j, l), 1-based, constrain the ratio
    R^{(j,l)}; every report made in that mode says so.
    """
    mode = ConditionMode(mode)
    N = len(weights)
    if N < 2:
        raise InvalidParameterError(f"the common witness search needs at least two weights, got {N}")
    model = model or GroupModel.integer_lattice(len(next(iter(K.cells))) if not K.is_empty() else 1)
    hz = _require_aperiodic(model, K, a)
    details: dict[str, Any] = {
        "mode": mode.value,
        "horizon": hz.N,
        "hypercyclicity": [
            {"l": idx + 1, "status": check_theorem_A(w, a, K, sched, p, model).status} for idx, w in enumerate(weights)
        ],
    }

    constraints = _single_constraints(weights)
    if mode is ConditionMode.PAPER_LITERAL:
        if any(e < 1 for e in sched.eps):
            unordered = [(j, l) for j in range(1, N + 1) for l in range(j + 1, N + 1)]
            cert = _reciprocal_certificate(model, weights, a, K, sched, unordered)
            logger.info("common witness search refuted by the reciprocal ratio identity")
            return Refuted(cert, details)
        ordered = [(j, l) for j in range(1, N + 1) for l in range(1, N + 1) if j != l]
    else:
        if not pairs:
            raise InvalidParameterError("one-directional mode needs at least one ordered pair (j, l)")
        ordered = []
        for j, l in pairs:
            if not (1 <= j <= N and 1 <= l <= N) or j == l:
                raise InvalidParameterError(f"invalid ordered pair ({j}, {l}) for {N} weights")
            ordered.append((int(j), int(l)))
        details["relaxation"] = (
            "one-directional: ratio bounds are imposed only for the listed ordered pairs, "
            "not for every pair l != j"
        )
        details["pairs"] = [list(pr) for pr in ordered]
    for j, l in ordered:
        constraints.append(_Constraint("ratio", (j, l), Ratio(weights[j - 1], weights[l - 1])))

    found = _greedy_search(model, a, K, constraints, sched)
    if isinstance(found, list):
        logger.warning("common witness search exhausted n_max=%d", sched.n_max)
        return BudgetExhausted(found, details)
    reverify_witness(model, a, K, found, [c.selector for c in constraints])
    return Satisfied(found, details)


def default_test_suite(model: GroupModel, b: int) -> list[LatticeFunction]:
    """{δ_x : x ∈ [-b, b]^d} ∪ {χ_[-b, b]^d}."""
    if b < 0:
        raise InvalidParameterError(f"suite radius must be >= 0, got {b}")
    box = CompactRegion.box(model, [-b] * model.dim, [b] * model.dim)
    return [LatticeFunction.delta(model, x) for x in box.sorted_cells()] + [indicator(model, box)]


@dataclass
class CriterionReport:
    rows: list[dict[str, Any]]
    satisfied: bool
    offending: Optional[dict[str, Any]] = None

    @property
    def status(self) -> str:
        return "Satisfied-on-suite" if self.satisfied else "Failed"

    def to_dict(self) -> dict[str, Any]:
        return {"decision": self.status, "rows": self.rows, "offending": self.offending}


def _shared_model(fns: Sequence[LatticeFunction]) -> GroupModel:
    model = fns[0].model
    for g in fns:
        if g.model != model:
            raise ModelMismatchError("test functions live on different models")
    return model


def verify_dhc_criterion(
    ops: Sequence[OperatorSpec],
    n_seq: Sequence[int],
    X0: Sequence[LatticeFunction],
    Xl: Sequence[Sequence[LatticeFunction]],
    p: Union[float, NormParam] = 2.0,
    tol: float = 1e-6,
) -> CriterionReport:
    """Evaluate the three quantities of the d-Hypercyclicity Criterion along n_seq.

    (i)   max over f ∈ X0 and l of ‖T_l^{n_k} f‖
    (ii)  max over l and g ∈ X_l of ‖S_{l,k} g‖
    (iii) max over (i, l) and g ∈ X_i of ‖T_l^{n_k} S_{i,k} g - δ_{il} g‖
    """
    pv = as_p(p)
    N = len(ops)
    if N < 2:
        raise InvalidParameterError(f"the criterion needs at least two operators, got {N}")
    a = ops[0].a
    if any(op.a != a for op in ops):
        raise InvalidParameterError("all operators must share the translation element a")
    if not n_seq:
        raise InvalidParameterError("n_seq must not be empty")
    if any(n2 <= n1 for n1, n2 in zip(n_seq, n_seq[1:])) or n_seq[0] < 0:
        raise InvalidParameterError(f"n_seq must be increasing and nonnegative: {list(n_seq)}")
    if len(Xl) != N or not X0 or any(not suite for suite in Xl):
        raise InvalidParameterError("X0 and one nonempty suite per operator are required")
    model = _shared_model([*X0, *(g for suite in Xl for g in suite)])
    if classify_element(model, a)["kind"] != "aperiodic":
        raise PeriodicElementError("aperiodic element required for the criterion")

    rows: list[dict[str, Any]] = []
    for k, n in enumerate(n_seq, start=1):
        term_i, worst_i = 0.0, None
        for l, op in enumerate(ops):
            for idx, f in enumerate(X0):
                v = lp_norm(op.power(n, f), pv)
                if worst_i is None or v > term_i:
                    term_i, worst_i = v, {"l": l + 1, "f": idx}
        term_ii, worst_ii = 0.0, None
        for l, op in enumerate(ops):
            for idx, g in enumerate(Xl[l]):
                v = lp_norm(op.inverse_power(n, g), pv)
                if worst_ii is None or v > term_ii:
                    term_ii, worst_ii = v, {"l": l + 1, "g": idx}
        term_iii, worst_iii = 0.0, None
        for i, op_s in enumerate(ops):
            for l, op_t in enumerate(ops):
                for idx, g in enumerate(Xl[i]):
                    out = apply_TS_power(a, op_t.w, op_t.exponent(n), op_s.w, op_s.exponent(n), g)
                    v = lp_distance(out, g, pv) if i == l else lp_norm(out, pv)
                    if worst_iii is None or v > term_iii:
                        term_iii, worst_iii = v, {"pair": [i + 1, l + 1], "g": idx}
        rows.append(
            {
                "k": k,
                "n": int(n),
                "term_i": term_i,
                "term_ii": term_ii,
                "term_iii": term_iii,
                "worst_i": worst_i,
                "worst_ii": worst_ii,
                "worst_iii": worst_iii,
            }
        )

    offending = None
    for name in ("term_i", "term_ii", "term_iii"):
        values = [r[name] for r in rows]
        tail = values[-3:]
        final_ok = values[-1] < tol
        monotone = all(b <= a_ for a_, b in zip(tail, tail[1:]))
        if not (final_ok and monotone):
            last = rows[-1]
            offending = {
                "quantity": name.split("_")[1],
                "value": values[-1],
                "nonincreasing_tail": monotone,
                "where": last[name.replace("term", "worst")],
            }
            break
    report = CriterionReport(rows=rows, satisfied=offending is None, offending=offending)
    logger.info("d-criterion on suite: %s", report.status)
    return report


@dataclass
class ProbeSuccess:
    u: LatticeFunction
    n: int
    distances: list[float]

    status = "Success"

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "n": self.n, "distances": self.distances, "u": [[list(x), v] for x, v in self.u.items()]}


@dataclass
class ProbeExhausted:
    diagnostics: dict[str, Any]

    status = "Exhausted"

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "diagnostics": self.diagnostics}


def probe_d_transitivity(
    ops: Sequence[OperatorSpec],
    targets: Sequence[LatticeFunction],
    eps: float,
    n_max: int,
    p: Union[float, NormParam] = 2.0,
) -> Union[ProbeSuccess, ProbeExhausted]:
    """Seek n <= n_max and u with ‖u - f_0‖ < ε and ‖T_l^n u - f_l‖ < ε for every l.

    u comes from build_uk with E the union of the target supports.
    """
    pv = as_p(p)
    if eps <= 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    N = len(ops)
    if len(targets) != N + 1:
        raise InvalidParameterError(f"{N} operators need {N + 1} targets, got {len(targets)}")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    a = ops[0].a
    if any(op.a != a for op in ops):
        raise InvalidParameterError("all operators must share the translation element a")
    model = _shared_model(targets)
    if all(t.is_zero() for t in targets):
        return ProbeSuccess(u=LatticeFunction.zero(model), n=1, distances=[0.0] * (N + 1))

    E = CompactRegion()
    for t in targets:
        E = E.union(t.support())
    weights = [op.w for op in ops]
    powers = [op.r for op in ops]
    f0, rest = targets[0], list(targets[1:])

    best: Optional[tuple[float, int, list[float]]] = None
    report = None
    first_saturated: Optional[int] = None
    for n in range(1, n_max + 1):
        report = build_uk(f0, rest, weights, a, n, E, pv, powers=powers)
        u = report.u
        dists = [lp_distance(u, f0, pv)] + [lp_distance(op.power(n, u), fl, pv) for op, fl in zip(ops, rest)]
        if first_saturated is None and not all(math.isfinite(d) for d in dists):
            first_saturated = n
        if max(dists) < eps:
            logger.info("d-transitivity probe succeeded at n=%d", n)
            return ProbeSuccess(u=u, n=n, distances=dists)
        if best is None or max(dists) < best[0]:
            best = (max(dists), n, dists)

    assert best is not None and report is not None
    best_report = build_uk(f0, rest, weights, a, best[1], E, pv, powers=powers)
    logger.warning("d-transitivity probe exhausted n_max=%d (best max distance %.3g)", n_max, best[0])
    return ProbeExhausted(
        {
            "n_max": n_max,
            "eps": eps,
            "best_n": best[1],
            "best_distances": best[2],
            "best_terms": best_report.to_dict()["terms"],
            "final_terms": report.to_dict()["terms"],
            "first_saturated_n": first_saturated,
            "blame": best_report.largest_term(),
        }
    )
