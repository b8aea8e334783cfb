"""Constructive machinery behind the disjoint-hypercyclicity characterization.

build_uk realizes the vector u = fχ_E + Σ_l S_l^{n}(f_l χ_E) that lands in
V_0 ∩ T_1^{-n}(V_1) ∩ ... ∩ T_N^{-n}(V_N), with every norm in its inequality chain computed
twice (operator path and product-integral path). extract_eta_sets goes the other way: from
a vector close to χ_K with an iterate close to χ_K it carves out the sets A, B, C_l, D_l,
F_l, H and the witness set E. synthesize_finite_horizon and simulate_orbit are the finite
stand-ins for a d-hypercyclic vector and its orbit.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

from config import CROSS_CHECK_ATOL, CROSS_CHECK_RTOL, HYPERLAB_THREADS, IDENTITY_TOL
from lab.errors import (
    InternalConsistencyError,
    InvalidParameterError,
    ModelMismatchError,
    PeriodicElementError,
)
from lab.funcspace import (
    LatticeFunction,
    NormParam,
    as_p,
    indicator,
    lp_distance,
    lp_norm,
    lp_norm_p,
    saturating_pow,
    sup_norm,
)
from lab.group_lattice import (
    CompactRegion,
    GroupModel,
    Horizon,
    PointLike,
    aperiodicity_horizon,
    haar_measure,
    translate_region,
)
from lab.translation_ops import (
    OperatorSpec,
    apply_S_power,
    apply_T_power,
    apply_TS_power,
    norm_via_products,
)
from lab.weights import WeightSpec

logger = logging.getLogger(__name__)


def _cells(region: CompactRegion) -> list[list[int]]:
    return [list(c) for c in region.sorted_cells()]


def _agree(x: float, y: float) -> bool:
    """Operator-side vs product-side value; a side that saturated to 0 or inf is not compared."""
    if not (0.0 < x < math.inf and 0.0 < y < math.inf):
        return True
    return math.isclose(x, y, rel_tol=CROSS_CHECK_RTOL, abs_tol=CROSS_CHECK_ATOL)


def _leq(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1.0 + CROSS_CHECK_RTOL) + IDENTITY_TOL


def _fsum(values) -> float:
    try:
        return math.fsum(values)
    except OverflowError:
        return math.inf


def _saturated(piece: LatticeFunction, source: LatticeFunction) -> bool:
    """Entries of source lost to underflow, or grown to inf, in the materialized piece."""
    return len(piece) < len(source) or not all(math.isfinite(v) for v in piece.values.values())


def _pairwise_disjoint(pieces: Sequence[LatticeFunction]) -> bool:
    seen: set = set()
    for piece in pieces:
        cells = set(piece.values)
        if seen & cells:
            return False
        seen |= cells
    return True


def _support_union(model: GroupModel, fns: Sequence[LatticeFunction]) -> CompactRegion:
    region = CompactRegion()
    for g in fns:
        if g.model != model:
            raise ModelMismatchError("all functions of a construction must share one model")
        region = region.union(g.support())
    return region


def _horizon_or_none(model: GroupModel, K: CompactRegion, a: PointLike) -> Optional[int]:
    if K.is_empty():
        return None
    hz = aperiodicity_horizon(model, K, a)
    return hz.N if isinstance(hz, Horizon) else None


@dataclass
class UkReport:
    """u with the full term accounting of its two inequality chains (norms as p-th powers)."""

    u: LatticeFunction
    n: int
    exponents: list[int]
    E: CompactRegion
    K: CompactRegion
    T_norm_p: dict[int, float]
    S_norms: dict[int, float]
    cross_norms: dict[tuple[int, int], float]
    deficit_term: float
    deficit_terms: dict[int, float]
    bounds: dict[str, Any]
    support_geometry: dict[str, Any]
    accounting: Optional[dict[str, Any]] = None
    saturated: bool = False

    def largest_term(self) -> dict[str, Any]:
        """The single largest p-th-power term with its label."""
        candidates: list[tuple[float, dict[str, Any]]] = []
        for l, v in self.T_norm_p.items():
            candidates.append((v, {"term": "T", "l": l, "value": v}))
        for l, v in self.S_norms.items():
            candidates.append((v, {"term": "S", "l": l, "value": v}))
        for (j, l), v in self.cross_norms.items():
            candidates.append((v, {"term": "cross", "pair": [j, l], "value": v}))
        candidates.append((self.deficit_term, {"term": "deficit", "value": self.deficit_term}))
        return max(candidates, key=lambda c: c[0])[1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "exponents": list(self.exponents),
            "E": _cells(self.E),
            "K": _cells(self.K),
            "terms": {
                "T_norm_p": {str(l): v for l, v in self.T_norm_p.items()},
                "S_norms": {str(l): v for l, v in self.S_norms.items()},
                "cross_norms": {f"{j},{l}": v for (j, l), v in self.cross_norms.items()},
                "deficit_term": self.deficit_term,
                "deficit_terms": {str(l): v for l, v in self.deficit_terms.items()},
            },
            "bounds": self.bounds,
            "support_geometry": self.support_geometry,
            "accounting": self.accounting,
            "saturated": self.saturated,
        }


def build_uk(
    f: LatticeFunction,
    targets: Sequence[LatticeFunction],
    weights: Sequence[WeightSpec],
    a: PointLike,
    n: int,
    E: CompactRegion,
    p: Union[float, NormParam],
    powers: Optional[Sequence[int]] = None,
    eps: Optional[float] = None,
    K: Optional[CompactRegion] = None,
) -> UkReport:
    """u = fχ_E + Σ_l S_{a,w_l}^{r_l n}(f_l χ_E) with both decompositions.

    The p-th-power decomposition ‖u - f‖^p <= deficit + Σ_l ‖S_l‖^p is exact when the
    pieces have pairwise disjoint supports and is asserted then; the Minkowski form is
    asserted for every input. With eps given, the ε/3 bookkeeping is evaluated as well.
    """
    pv = as_p(p)
    if n < 0:
        raise InvalidParameterError(f"n must be >= 0, got {n}")
    if len(targets) != len(weights):
        raise InvalidParameterError(f"{len(targets)} targets for {len(weights)} weights")
    N = len(weights)
    model = f.model
    powers = list(powers) if powers is not None else [1] * N
    if len(powers) != N or any(r < 1 for r in powers):
        raise InvalidParameterError(f"powers must be {N} integers >= 1, got {powers}")
    exps = [r * n for r in powers]

    K_eff = _support_union(model, [f, *targets])
    if K is not None:
        K_eff = K_eff.union(K)
    E = E.intersection(K_eff)
    rest = K_eff.difference(E)
    deficit_measure = haar_measure(model, rest)

    fE = f.restrict(E)
    flE = [fl.restrict(E) for fl in targets]
    S_pieces = [apply_S_power(a, w, e, g) for w, e, g in zip(weights, exps, flE)]
    T_pieces = [apply_T_power(a, w, e, fE) for w, e in zip(weights, exps)]
    u = fE
    for piece in S_pieces:
        u = u + piece
    saturated = any(_saturated(s, g) for s, g in zip(S_pieces, flE)) or any(_saturated(t, fE) for t in T_pieces)
    if saturated:
        logger.debug("build_uk: pieces saturated at n=%d, decomposition checks skipped", n)

    T_norm_p: dict[int, float] = {}
    S_norms: dict[int, float] = {}
    cross_norms: dict[tuple[int, int], float] = {}
    for idx in range(N):
        l = idx + 1
        direct = lp_norm_p(T_pieces[idx], pv)
        formula = saturating_pow(norm_via_products(a, weights[idx], exps[idx], f, E, pv, "T"), pv)
        if not _agree(direct, formula):
            raise InternalConsistencyError(f"‖T_{l}^n(fχ_E)‖_p^p: operator {direct!r} vs products {formula!r}")
        T_norm_p[l] = formula
        direct = lp_norm_p(S_pieces[idx], pv)
        formula = saturating_pow(norm_via_products(a, weights[idx], exps[idx], targets[idx], E, pv, "S"), pv)
        if not _agree(direct, formula):
            raise InternalConsistencyError(f"‖S_{l}^n(f_lχ_E)‖_p^p: operator {direct!r} vs products {formula!r}")
        S_norms[l] = formula

    cross_pieces: dict[tuple[int, int], LatticeFunction] = {}
    for j in range(N):
        for l in range(N):
            if j == l:
                continue
            closed = apply_TS_power(a, weights[j], exps[j], weights[l], exps[l], flE[l])
            direct = lp_norm_p(apply_T_power(a, weights[j], exps[j], S_pieces[l]), pv)
            formula = lp_norm_p(closed, pv)
            if not _agree(direct, formula):
                raise InternalConsistencyError(
                    f"‖T_{j + 1}^n S_{l + 1}^n(f_lχ_E)‖_p^p: operator {direct!r} vs products {formula!r}"
                )
            cross_norms[(j + 1, l + 1)] = formula
            cross_pieces[(j + 1, l + 1)] = closed

    deficit_term = sup_norm(f) ** pv * deficit_measure
    deficit_terms = {l + 1: sup_norm(targets[l]) ** pv * deficit_measure for l in range(N)}

    bounds: dict[str, Any] = {}
    lhs_u = lp_norm_p(u - f, pv)
    rhs_pp = deficit_term + _fsum(S_norms.values())
    rhs_mink = saturating_pow(deficit_term ** (1 / pv) + _fsum(v ** (1 / pv) for v in S_norms.values()), pv)
    disjoint_u = _pairwise_disjoint([f.restrict(rest), *S_pieces])
    bounds["u_minus_f"] = {
        "lhs": lhs_u,
        "rhs": rhs_pp,
        "rhs_minkowski": rhs_mink,
        "pieces_disjoint": disjoint_u,
        "holds": _leq(lhs_u, rhs_pp),
    }
    if not saturated and (not _leq(lhs_u, rhs_mink) or (disjoint_u and not _leq(lhs_u, rhs_pp))):
        raise InternalConsistencyError(f"‖u - f‖_p^p = {lhs_u!r} breaks its decomposition")

    bounds["T_minus_f"] = {}
    for j in range(N):
        lhs = lp_norm_p(apply_T_power(a, weights[j], exps[j], u) - targets[j], pv)
        others = [cross_norms[(j + 1, l + 1)] for l in range(N) if l != j]
        rhs = T_norm_p[j + 1] + deficit_terms[j + 1] + _fsum(others)
        mink = saturating_pow(
            T_norm_p[j + 1] ** (1 / pv)
            + deficit_terms[j + 1] ** (1 / pv)
            + _fsum(v ** (1 / pv) for v in others),
            pv,
        )
        pieces = [T_pieces[j], targets[j].restrict(rest)]
        pieces += [cross_pieces[(j + 1, l + 1)] for l in range(N) if l != j]
        disjoint = _pairwise_disjoint(pieces)
        bounds["T_minus_f"][str(j + 1)] = {
            "lhs": lhs,
            "rhs": rhs,
            "rhs_minkowski": mink,
            "pieces_disjoint": disjoint,
            "holds": _leq(lhs, rhs),
        }
        if not saturated and (not _leq(lhs, mink) or (disjoint and not _leq(lhs, rhs))):
            raise InternalConsistencyError(f"‖T_{j + 1}^n u - f_{j + 1}‖_p^p = {lhs!r} breaks its decomposition")

    horizon = _horizon_or_none(model, K_eff, a)
    geometry: dict[str, Any] = {"horizon": horizon, "applies": False, "S_off_K": {}, "T_off_K": {}}
    if horizon is not None and all(e > horizon for e in exps):
        geometry["applies"] = True
        for idx in range(N):
            s_off = S_pieces[idx].support().intersection(K_eff).is_empty()
            t_off = T_pieces[idx].support().intersection(K_eff).is_empty()
            geometry["S_off_K"][str(idx + 1)] = s_off
            geometry["T_off_K"][str(idx + 1)] = t_off
            if not (s_off and t_off):
                raise InternalConsistencyError(f"piece {idx + 1} meets K although n exceeds the horizon")

    report = UkReport(
        u=u,
        n=n,
        exponents=exps,
        E=E,
        K=K_eff,
        T_norm_p=T_norm_p,
        S_norms=S_norms,
        cross_norms=cross_norms,
        deficit_term=deficit_term,
        deficit_terms=deficit_terms,
        bounds=bounds,
        support_geometry=geometry,
        saturated=saturated,
    )
    if eps is not None:
        report.accounting = _epsilon_accounting(report, f, targets, weights, a, pv, eps, deficit_measure)
    return report


def _epsilon_accounting(
    report: UkReport,
    f: LatticeFunction,
    targets: Sequence[LatticeFunction],
    weights: Sequence[WeightSpec],
    a: PointLike,
    pv: float,
    eps: float,
    deficit_measure: float,
) -> dict[str, Any]:
    """The ε/3 bookkeeping: thresholds on the sup-products over E and on λ(K∖E)."""
    if eps <= 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    model = f.model
    N = len(weights)
    chi_E = indicator(model, report.E)
    exps = report.exponents

    def threshold(scale: float) -> float:
        return math.inf if scale == 0 else (eps / scale) ** (1 / pv)

    checks: list[dict[str, Any]] = []
    f_pp = lp_norm_p(f, pv)
    for idx in range(N):
        sup_fwd = sup_norm(apply_T_power(a, weights[idx], exps[idx], chi_E))
        sup_bwd = sup_norm(apply_S_power(a, weights[idx], exps[idx], chi_E))
        fl_pp = lp_norm_p(targets[idx], pv)
        checks.append({"product": "forward", "l": idx + 1, "sup": sup_fwd, "bound": threshold(3 * f_pp)})
        checks.append({"product": "backward", "l": idx + 1, "sup": sup_bwd, "bound": threshold(3 * N * fl_pp)})
        for j in range(N):
            if j == idx:
                continue
            sup_ratio = sup_norm(apply_TS_power(a, weights[j], exps[j], weights[idx], exps[idx], chi_E))
            checks.append(
                {"product": "ratio", "pair": [j + 1, idx + 1], "sup": sup_ratio, "bound": threshold(3 * N * fl_pp)}
            )
    sup_inf = max([sup_norm(f), *(sup_norm(t) for t in targets)]) ** pv
    measure_bound = math.inf if sup_inf == 0 else eps / (3 * sup_inf)
    for c in checks:
        c["ok"] = c["sup"] < c["bound"]
    hypotheses = all(c["ok"] for c in checks) and deficit_measure < measure_bound
    lhs_values = [report.bounds["u_minus_f"]["lhs"]] + [b["lhs"] for b in report.bounds["T_minus_f"].values()]
    conclusion = all(v < eps for v in lhs_values)
    disjoint = report.bounds["u_minus_f"]["pieces_disjoint"] and all(
        b["pieces_disjoint"] for b in report.bounds["T_minus_f"].values()
    )
    if hypotheses and disjoint and not conclusion and not report.saturated:
        raise InternalConsistencyError(f"ε/3 accounting failed for eps={eps!r}: {lhs_values}")
    return {
        "eps": eps,
        "checks": checks,
        "deficit_measure": deficit_measure,
        "deficit_bound": measure_bound,
        "hypotheses_met": hypotheses,
        "pieces_disjoint": disjoint,
        "conclusion_holds": conclusion,
    }


@dataclass
class EtaSetDecomposition:
    eta: float
    m: int
    p: float
    K: CompactRegion
    A: CompactRegion
    B: CompactRegion
    C: dict[int, CompactRegion]
    D: dict[int, CompactRegion]
    F: dict[int, CompactRegion]
    H: CompactRegion
    E: CompactRegion
    measures: dict[str, Any]
    premise: dict[str, Any]
    bound_checks: dict[str, Any]
    sup_reports: dict[str, Any]

    @property
    def premise_ok(self) -> bool:
        return bool(self.premise["ok"])

    @property
    def status(self) -> str:
        return "ok" if self.premise_ok else "PremiseViolated"

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "eta": self.eta,
            "m": self.m,
            "p": self.p,
            "sets": {
                "K": _cells(self.K),
                "A": _cells(self.A),
                "B": _cells(self.B),
                "C": {str(l): _cells(r) for l, r in self.C.items()},
                "D": {str(l): _cells(r) for l, r in self.D.items()},
                "F": {str(l): _cells(r) for l, r in self.F.items()},
                "H": _cells(self.H),
                "E": _cells(self.E),
            },
            "measures": self.measures,
            "premise": self.premise,
            "bound_checks": self.bound_checks,
            "sup_reports": self.sup_reports,
        }


def extract_eta_sets(
    f: LatticeFunction,
    weights: Sequence[WeightSpec],
    a: PointLike,
    m: int,
    K: CompactRegion,
    eta: float,
    p: Union[float, NormParam],
) -> EtaSetDecomposition:
    """Carve A_η, B_η, C_l, D_l, F_l, H and E = K ∖ (A ∪ (B + m·a) ∪ H) out of f.

    The sets living in G ∖ K are computed on the window supp(f) ∪ supp(T_l^m f) ∪ K, outside
    of which every defining inequality fails. The ratio sups over E are reported, not
    asserted: the set F_l lives off K and does not control the ratio at points of K.
    """
    pv = as_p(p)
    if not (0.0 < eta < 1.0):
        raise InvalidParameterError(f"eta must lie in (0, 1), got {eta}")
    model = f.model
    hz = aperiodicity_horizon(model, K, a)
    if not isinstance(hz, Horizon):
        raise PeriodicElementError(f"aperiodic element required: {hz.reason}")
    if m <= hz.N:
        raise InvalidParameterError(f"m = {m} must exceed the aperiodicity horizon {hz.N} of K")
    N = len(weights)
    chi_K = indicator(model, K)
    Tm_f = [apply_T_power(a, w, m, f) for w in weights]
    window = K.union(f.support())
    for g in Tm_f:
        window = window.union(g.support())
    outside = window.difference(K)

    dist0 = lp_distance(f, chi_K, pv)
    dists = [lp_distance(g, chi_K, pv) for g in Tm_f]
    premise = {
        "threshold": eta**2,
        "f_minus_chiK": dist0,
        "Tm_f_minus_chiK": {str(l + 1): d for l, d in enumerate(dists)},
    }
    premise["ok"] = dist0 < eta**2 and all(d < eta**2 for d in dists)

    ap = model.point(a)
    A = CompactRegion(frozenset(x for x in K.cells if abs(f(x) - 1.0) >= eta))
    B = CompactRegion(frozenset(x for x in outside.cells if abs(f(x)) >= eta))
    C: dict[int, CompactRegion] = {}
    D: dict[int, CompactRegion] = {}
    F: dict[int, CompactRegion] = {}
    for idx, g in enumerate(Tm_f):
        l = idx + 1
        C[l] = CompactRegion(frozenset(x for x in K.cells if abs(g(x) - 1.0) >= eta))
        # φ_m(x) f(x) is the value of T^m f at x + m·a
        D[l] = CompactRegion(
            frozenset(x for x in K.cells if abs(g(tuple(xi + m * ai for xi, ai in zip(x, ap)))) >= eta)
        )
        F[l] = CompactRegion(frozenset(x for x in outside.cells if abs(g(x)) >= eta))
    H = CompactRegion()
    for family in (C, D, F):
        for region in family.values():
            H = H.union(region)
    B_shift = translate_region(model, B, a, -m)
    excluded = A.union(B_shift).union(H)
    E = K.difference(excluded)

    lam = lambda r: haar_measure(model, r)  # noqa: E731
    measures = {
        "K": lam(K),
        "A": lam(A),
        "B": lam(B),
        "C": {str(l): lam(r) for l, r in C.items()},
        "D": {str(l): lam(r) for l, r in D.items()},
        "F": {str(l): lam(r) for l, r in F.items()},
        "H": lam(H),
        "excluded": lam(excluded),
        "E": lam(E),
    }
    bound = eta**pv
    bound_checks: dict[str, Any] = {"eta_p": bound, "union_bound": (2 + 3 * N) * bound}
    bound_checks["A"] = measures["A"] < bound
    bound_checks["B"] = measures["B"] < bound
    for key in ("C", "D", "F"):
        bound_checks[key] = {l: v < bound for l, v in measures[key].items()}
    bound_checks["union"] = measures["excluded"] < (2 + 3 * N) * bound

    threshold = eta / (1.0 - eta)
    sup_reports: dict[str, Any] = {"threshold": threshold, "backward": {}, "forward": {}, "ratio": {}}
    if not E.is_empty():
        chi_E = indicator(model, E)
        for idx, w in enumerate(weights):
            bwd = sup_norm(apply_S_power(a, w, m, chi_E))
            fwd = sup_norm(apply_T_power(a, w, m, chi_E))
            sup_reports["backward"][str(idx + 1)] = {"sup": bwd, "below": bwd < threshold}
            sup_reports["forward"][str(idx + 1)] = {"sup": fwd, "below": fwd < threshold}
            for j, wj in enumerate(weights):
                if j == idx:
                    continue
                rat = sup_norm(apply_TS_power(a, wj, m, w, m, chi_E))
                sup_reports["ratio"][f"{j + 1},{idx + 1}"] = {"sup": rat, "below": rat < threshold}

    if premise["ok"]:
        flat = [bound_checks["A"], bound_checks["B"], bound_checks["union"]]
        for key in ("C", "D", "F"):
            flat.extend(bound_checks[key].values())
        if not all(flat):
            raise InternalConsistencyError(f"measure bounds fail although the premise holds: {bound_checks}")
        for key in ("backward", "forward"):
            for l, entry in sup_reports[key].items():
                if not entry["below"]:
                    raise InternalConsistencyError(f"{key} sup on E for l={l} is {entry['sup']!r} >= {threshold!r}")
    else:
        logger.warning("eta-set premise violated: ‖f-χ_K‖=%.3g, ‖T^m f-χ_K‖=%s (need < %.3g)", dist0, dists, eta**2)

    return EtaSetDecomposition(
        eta=eta,
        m=m,
        p=pv,
        K=K,
        A=A,
        B=B,
        C=C,
        D=D,
        F=F,
        H=H,
        E=E,
        measures=measures,
        premise=premise,
        bound_checks=bound_checks,
        sup_reports=sup_reports,
    )


def scan_eta(
    f: LatticeFunction,
    weights: Sequence[WeightSpec],
    a: PointLike,
    m: int,
    K: CompactRegion,
    p: Union[float, NormParam],
    max_halvings: int = 20,
) -> Optional[EtaSetDecomposition]:
    """Largest η in {1/2, 1/4, ...} whose premise holds, with its decomposition."""
    for i in range(1, max_halvings + 1):
        decomposition = extract_eta_sets(f, weights, a, m, K, 2.0**-i, p)
        if decomposition.premise_ok:
            return decomposition
    return None


@dataclass
class SynthesisSuccess:
    u: LatticeFunction
    times: list[int]
    distances: list[list[float]]
    pieces_checked: int

    status = "Success"

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "times": list(self.times),
            "distances": self.distances,
            "pieces_checked": self.pieces_checked,
        }


@dataclass
class SynthesisExhausted:
    diagnostics: dict[str, Any] = field(default_factory=dict)

    status = "Exhausted"

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "diagnostics": self.diagnostics}


def _shared_element(ops: Sequence[OperatorSpec]) -> tuple[int, ...]:
    if not ops:
        raise InvalidParameterError("at least one operator is required")
    a = ops[0].a
    if any(op.a != a for op in ops):
        raise InvalidParameterError("all operators must share the translation element a")
    return a


def synthesize_finite_horizon(
    ops: Sequence[OperatorSpec],
    schedule: Sequence[Sequence[LatticeFunction]],
    eps: float,
    budget: int,
    p: Union[float, NormParam] = 2.0,
) -> Union[SynthesisSuccess, SynthesisExhausted]:
    """u = Σ_j Σ_l S_l^{m_j}(g_j^{(l)}) visiting every target tuple within eps.

    m_j is the smallest time after m_{j-1} for which every residual piece
    T_l^{m_i} S_{l'}^{m_j} g_j^{(l')} and T_l^{m_j} S_{l'}^{m_i} g_i^{(l')} involving the new
    index has norm below eps / (2·J·N); the residual of tuple j under T_l is a sum of at most
    J·N - 1 such pieces. The result is then re-verified directly on the materialized u.
    """
    pv = as_p(p)
    if eps <= 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    a = _shared_element(ops)
    N, J = len(ops), len(schedule)
    if J < 1:
        raise InvalidParameterError("the schedule needs at least one target tuple")
    for tup in schedule:
        if len(tup) != N:
            raise InvalidParameterError(f"every target tuple needs {N} functions, got {len(tup)}")
    tol = eps / (2 * J * N)

    def piece_norm(jt: int, l: int, js: int, ls: int, times: list[int]) -> float:
        g = schedule[js][ls]
        out = apply_TS_power(
            a, ops[l].w, ops[l].exponent(times[jt]), ops[ls].w, ops[ls].exponent(times[js]), g
        )
        return lp_norm(out, pv)

    times: list[int] = []
    checked = 0
    for j in range(J):
        start = times[-1] + 1 if times else 1
        best: Optional[dict[str, Any]] = None
        accepted = False
        for m in range(start, budget + 1):
            trial = times + [m]
            worst = (0.0, None)
            for jt in range(j + 1):
                for js in range(j + 1):
                    if jt != j and js != j:
                        continue
                    for l in range(N):
                        for ls in range(N):
                            if jt == js and l == ls:
                                continue
                            value = piece_norm(jt, l, js, ls, trial)
                            checked += 1
                            if value > worst[0]:
                                worst = (value, {"T": [jt + 1, l + 1], "S": [js + 1, ls + 1]})
                            if value >= tol:
                                break
                        else:
                            continue
                        break
            if worst[0] < tol:
                times.append(m)
                accepted = True
                logger.debug("synthesizer: tuple %d placed at m=%d (worst piece %.3g)", j + 1, m, worst[0])
                break
            if best is None or worst[0] < best["worst_piece_norm"]:
                best = {"m": m, "worst_piece_norm": worst[0], "worst_piece": worst[1]}
        if not accepted:
            logger.warning("synthesizer exhausted the budget %d at tuple %d", budget, j + 1)
            return SynthesisExhausted(
                {
                    "failed_tuple": j + 1,
                    "times_so_far": list(times),
                    "budget": budget,
                    "piece_tolerance": tol,
                    "best": best,
                }
            )

    u = LatticeFunction.zero(schedule[0][0].model)
    for j, m in enumerate(times):
        for l, op in enumerate(ops):
            u = u + op.inverse_power(m, schedule[j][l])
    distances = [[lp_distance(op.power(m, u), schedule[j][l], pv) for l, op in enumerate(ops)] for j, m in enumerate(times)]
    if not all(d < eps for row in distances for d in row):
        logger.warning("synthesizer: direct re-verification failed: %s", distances)
        return SynthesisExhausted(
            {"reason": "direct re-verification failed", "times": list(times), "distances": distances}
        )
    return SynthesisSuccess(u=u, times=times, distances=distances, pieces_checked=checked)


@dataclass
class OrbitSeries:
    rows: list[dict[str, Any]]
    eps: Optional[float] = None

    @property
    def visits(self) -> list[int]:
        if self.eps is None:
            return []
        return [row["n"] for row in self.rows if row["d_n"] < self.eps]

    def to_dict(self) -> dict[str, Any]:
        return {"eps": self.eps, "visits": self.visits, "rows": self.rows}


def simulate_orbit(
    ops: Sequence[OperatorSpec],
    u: LatticeFunction,
    targets: Sequence[LatticeFunction],
    p: Union[float, NormParam],
    n_max: int,
    eps: Optional[float] = None,
    max_workers: Optional[int] = None,
) -> OrbitSeries:
    """d_n = max_l ‖T_l^n u - g^{(l)}‖_p for n = 0..n_max."""
    pv = as_p(p)
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    if len(targets) != len(ops):
        raise InvalidParameterError(f"{len(targets)} targets for {len(ops)} operators")

    def row(n: int) -> dict[str, Any]:
        per_l = [lp_distance(op.power(n, u), g, pv) for op, g in zip(ops, targets)]
        return {"n": n, "d_n": max(per_l), "per_l": per_l}

    workers = max_workers or HYPERLAB_THREADS
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(n_max + 1)))
    else:
        rows = [row(n) for n in range(n_max + 1)]
    return OrbitSeries(rows=rows, eps=eps)
