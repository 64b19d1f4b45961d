"""Report construction and independent re-verification for every CLI command.

A report is a JSON object {format_version, command, verdict, payload, log}.
The payload always embeds the input file and the flags, so ``verify`` needs
nothing but the report itself.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from . import serialize as S
from .ainfty import (
    AInftyMorphism, AInftyStructure, CoalgebraMorphism, Coderivation, check_morphism, check_stasheff,
    conjugate, exp_coderivation,
)
from .dglie import (
    GaugeElement, GradedLie, LieDerivation, MCElement, _restricted_matrix, check_derivation,
    check_graded_lie, check_mc, gauge_act, gauge_act_mc, gauge_trivialize, hochschild_as_dglie,
    layer, lie_kaledin_class, lift_map, square_is_zero, twisted,
)
from .errors import InputError, InvariantError
from .formality import (
    FormalityCertificate, exp_recompose, extract_quasi_iso, formality_test, h_coefficient, kaledin_class,
    lift_coeffs, normal_cone,
)
from .graded import GradedModule, MultiMap
from .hochschild import boundary_system, hochschild_d, weight_cohomology
from .linalg import SparseMatrix, dot
from .ring import QQ, HPoly, Ring, format_rational, parse_rational
from .transfer import DGAlgebra, build_contraction, minimal_model

VERDICTS = ("OK", "VIOLATIONS", "N_FORMAL", "FULLY_FORMAL", "OBSTRUCTED", "GAUGE_TRIVIAL", "GAUGE_OBSTRUCTED")


def make_report(command: str, verdict: str, payload: Dict[str, Any], log: List[str]) -> Dict[str, Any]:
    assert verdict in VERDICTS
    return {"format_version": S.FORMAT_VERSION, "command": command, "verdict": verdict,
            "payload": payload, "log": log}


def _violations_json(res, M: GradedModule, target: Optional[GradedModule] = None):
    out = []
    for v in res.violations:
        ins, defect = v.named(M, target)
        out.append({"n": v.n, "inputs": ins,
                    "defect": [{"element": k, "coeff": S.format_scalar(c)} for k, c in defect.items()]})
    return out


def default_check_bound(A: AInftyStructure) -> int:
    return max(2 * A.max_arity - 1, 3)


# check ----------------------------------------------------------------------------


def lie_from_json(data, path="lie") -> Tuple[GradedLie, Optional[LieDerivation], GradedModule]:
    M = S.module_from_json(data.get("module", []), "module")
    lie = data[path]
    if not isinstance(lie, dict):
        raise InputError("%s: expected {bracket, differential}" % path)
    br = S.map_from_json({"arity": 2, "entries": lie.get("bracket", [])}, lambda n: 0, M, M, QQ, path + ".bracket")
    L = GradedLie(M, br)
    d = None
    if "differential" in lie:
        dm = S.map_from_json({"arity": 1, "entries": lie["differential"]}, lambda n: 1, M, M, QQ,
                             path + ".differential")
        d = LieDerivation(dm)
    return L, d, M


def run_check(data: Dict[str, Any], bound: Optional[int]) -> Dict[str, Any]:
    log = []
    payload: Dict[str, Any] = {"input": data}
    ok = True
    if "m" in data or "lie" not in data:
        A = S.structure_from_json(data)
        K = default_check_bound(A) if bound is None else bound
        payload["arity_bound"] = K
        res = check_stasheff(A, K)
        payload["stasheff"] = {"ok": res.ok, "violations": _violations_json(res, A.module)}
        log.append("stasheff identities up to arity %d: %s" % (K, "ok" if res.ok else
                   "violated at n=%s" % ",".join(map(str, res.failing_arities))))
        ok &= res.ok
        if "morphism" in data:
            f = S.morphism_from_json(data["morphism"], A)
            tres = check_stasheff(f.target, K)
            mres = check_morphism(f, K)
            payload["morphism"] = {"ok": mres.ok and tres.ok, "target_ok": tres.ok,
                                   "violations": _violations_json(mres, A.module, f.target.module)}
            log.append("morphism identities up to arity %d: %s" % (K, "ok" if mres.ok else "violated"))
            ok &= mres.ok and tres.ok
    if "lie" in data:
        L, d, M = lie_from_json(data)
        res = check_graded_lie(L)
        entry = {"ok": res.ok, "violations": _violations_json(res, M)}
        log.append("graded Lie identities: %s" % ("ok" if res.ok else "violated"))
        ok &= res.ok
        if d is not None:
            bad = check_derivation(L, d)
            sq = square_is_zero(d)
            entry["derivation_ok"] = not bad
            entry["square_zero"] = sq
            log.append("differential: derivation %s, d^2 %s" % ("ok" if not bad else "fails",
                                                               "= 0" if sq else "!= 0"))
            ok &= (not bad) and sq
        payload["lie"] = entry
    return make_report("check", "OK" if ok else "VIOLATIONS", payload, log)


def verify_check(rep) -> bool:
    p = rep["payload"]
    again = run_check(p["input"], p.get("arity_bound"))
    return again["verdict"] == rep["verdict"] and again["payload"] == p


# transfer -------------------------------------------------------------------------


def dg_from_structure(A: AInftyStructure) -> DGAlgebra:
    if A.ring != QQ:
        raise InputError("transfer works over Q only")
    if any(n not in (1, 2) for n in A.components):
        raise InputError("transfer input must be a DG algebra (only m_1 and m_2)")
    M = A.module
    E = DGAlgebra(M, A.m(1), A.m(2))
    try:
        E.validate()
    except ValueError as e:
        raise InputError(str(e)) from None
    return E


def run_transfer(data, bound: Optional[int]) -> Dict[str, Any]:
    A = S.structure_from_json(data)
    E = dg_from_structure(A)
    K = 5 if bound is None else bound
    C = build_contraction(E)
    H, f = minimal_model(E, C, K)
    if not check_stasheff(H, K).ok or not check_morphism(f, K).ok:
        raise InvariantError("transferred structure fails its identities")
    log = ["cohomology: %s" % ", ".join("%s(%d)" % b for b in C.cohomology_module.basis),
           "transferred operations in arities: %s" % (",".join(map(str, sorted(H.components))) or "none"),
           "stasheff and morphism identities verified up to arity %d" % K]
    payload = {"input": data, "arity_bound": K,
               "minimal_model": S.structure_to_json(H),
               "morphism": {"components": S.maps_to_json(f.components)},
               "contraction": {"inclusion": S.map_to_json(C.inclusion), "projection": S.map_to_json(C.projection),
                               "homotopy": S.map_to_json(C.homotopy)}}
    return make_report("transfer", "OK", payload, log)


def verify_transfer(rep) -> bool:
    p = rep["payload"]
    E = S.structure_from_json(p["input"])
    H = S.structure_from_json(p["minimal_model"])
    K = p["arity_bound"]
    if not H.is_minimal or not check_stasheff(H, K).ok:
        return False
    f = S.morphism_from_json({"components": p["morphism"]["components"], "target": S.structure_to_json(E)}, H)
    if not check_morphism(f, K).ok:
        return False
    # f_1 must induce an isomorphism on cohomology: check p o f_1 = id
    proj = S.map_from_json(p["contraction"]["projection"], lambda n: 0, E.module, H.module, QQ, "projection")
    from .ainfty import compose_arity1
    return compose_arity1(proj, f.f(1)) == MultiMap.identity(H.module)


# hh --------------------------------------------------------------------------------


def run_hh(data, degrees: List[int], weights: List[int]) -> Dict[str, Any]:
    A = S.structure_from_json(data)
    if not A.is_associative:
        raise InputError("weight decomposition requires m_i=0, i≠2")
    V = A.bar_module
    table = []
    log = []
    for p in degrees:
        for n in weights:
            slot = weight_cohomology(A, p, n)
            reps = [S.coderivation_to_json(c) for c in slot.representatives()]
            table.append({"hh_degree": p, "arity": n, "dimension": slot.dimension,
                          "slot_sizes": [len(slot.basis_in), len(slot.basis_mid), len(slot.basis_out)],
                          "filtration_ranks": slot.result.filtration_ranks,
                          "representatives": reps})
            log.append("HH^%d weight %d: dimension %d (slot %d -> %d -> %d)"
                       % (p, n, slot.dimension, len(slot.basis_in), len(slot.basis_mid), len(slot.basis_out)))
    return make_report("hh", "OK", {"input": data, "degrees": degrees, "weights": weights,
                                    "table": table}, log)


def verify_hh(rep) -> bool:
    p = rep["payload"]
    A = S.structure_from_json(p["input"])
    V = A.bar_module
    for row in p["table"]:
        slot = weight_cohomology(A, row["hh_degree"], row["arity"])
        if slot.dimension != row["dimension"]:
            return False
        reps = [S.coderivation_from_json(c, V, A.ring, "rep") for c in row["representatives"]]
        for c in reps:
            if not hochschild_d(c, A, row["arity"] + 1).is_zero():
                return False
            if all(x == 0 for x in slot.lift(c)[0]):
                return False
        # representatives are independent in cohomology
        coords = [slot.lift(c)[0] for c in reps]
        from .linalg import rank
        if coords and rank(SparseMatrix(len(coords), len(coords[0]),
                                        {(i, j): x for i, r in enumerate(coords) for j, x in enumerate(r) if x})) != len(coords):
            return False
    return True


# Fredholm certificates on labelled rows ----------------------------------------------


def _labeled_cert(cert, rows, V):
    return {"y": S.labeled_vector_to_json(cert.y, rows, V), "value": format_rational(cert.value)}


def _check_labeled_cert(obj, A0: AInftyStructure, ansatz, target: Coderivation, bound: Optional[int]) -> bool:
    V = A0.bar_module
    y = S.labeled_vector_from_json(obj["y"], V, QQ, "certificate.y")
    value = parse_rational(obj["value"])
    M, b, cols_basis, rows, _ = boundary_system(A0, target.degree - 1, ansatz, target, bound)
    yv = {}
    for i, lab in enumerate(rows):
        if lab in y:
            yv[i] = y[lab]
    if len(yv) != len(y):
        # a label outside the system's rows pairs with nothing; harmless only if its weight is zero
        if any(c for lab, c in y.items() if lab not in set(rows)):
            return False
    if M.transpose().apply(yv):
        return False
    return value != 0 and dot(yv, b) == value


# kaledin ----------------------------------------------------------------------------


def kaledin_input(data, levels: Optional[int]):
    A = S.structure_from_json(data)
    if A.ring == QQ:
        if levels is None:
            raise InputError("a Q input needs --levels to build the normal cone")
        if not A.is_minimal:
            raise InputError("normal cone needs a minimal structure (m_1 = 0)")
        return normal_cone(A, levels).structure
    if not A.is_minimal:
        raise InputError("kaledin_class needs a minimal structure")
    return A


def run_kaledin(data, levels: Optional[int], bound: Optional[int]) -> Dict[str, Any]:
    B = kaledin_input(data, levels)
    kc = kaledin_class(B, bound)
    V = B.bar_module
    payload = {"input": data, "levels": levels, "arity_bound": kc.arity_bound,
               "level": kc.level, "zero": kc.zero,
               "cocycle": S.coderivation_to_json(kc.cocycle),
               "gauges": [S.coderivation_to_json(g) for g in kc.gauges]}
    log = ["structure over Q[h]/h^%d, arity bound %d" % (kc.level + 1, kc.arity_bound)]
    if kc.zero:
        log.append("class vanishes: gauge found at every level 1..%d" % kc.level)
        verdict = "GAUGE_TRIVIAL"
    else:
        payload["failed_at"] = kc.failed_at
        m0 = h_coefficient(B.bar().truncate(kc.arity_bound), 0)
        A0 = AInftyStructure.from_bar(m0, B.module)
        cur = _apply_gauges(B, kc.gauges, kc.arity_bound)
        target = h_coefficient(cur, kc.failed_at)
        _, _, _, rows, _ = boundary_system(A0, 0, range(1, kc.arity_bound), target, kc.arity_bound)
        payload["certificate"] = _labeled_cert(kc.certificate, rows, V)
        log.append("class nonzero: h^%d deviation is not a coboundary" % kc.failed_at)
        verdict = "OBSTRUCTED"
    return make_report("kaledin", verdict, payload, log)


def _apply_gauges(B: AInftyStructure, gauges: List[Coderivation], K: int) -> Coderivation:
    cur = B.bar().truncate(K)
    for k, g in enumerate(gauges, 1):
        if not g.is_zero():
            cur = conjugate(exp_coderivation(lift_coeffs(g, B.ring, k), K), cur, K)
    return cur


def verify_kaledin(rep) -> bool:
    p = rep["payload"]
    B = kaledin_input(p["input"], p["levels"])
    K = p["arity_bound"]
    V = B.bar_module
    gauges = [S.coderivation_from_json(g, V, QQ, "gauges[%d]" % i) for i, g in enumerate(p["gauges"])]
    cur = _apply_gauges(B, gauges, K)
    m0 = h_coefficient(B.bar().truncate(K), 0)
    if p["zero"]:
        return rep["verdict"] == "GAUGE_TRIVIAL" and cur == lift_coeffs(m0, B.ring)
    k = p["failed_at"]
    for j in range(1, k):
        if not h_coefficient(cur, j).is_zero():
            return False
    A0 = AInftyStructure.from_bar(m0, B.module)
    return rep["verdict"] == "OBSTRUCTED" and _check_labeled_cert(
        p["certificate"], A0, range(1, K), h_coefficient(cur, k), K)


# formality --------------------------------------------------------------------------


def formality_input(data) -> AInftyStructure:
    A = S.structure_from_json(data)
    if A.ring != QQ:
        raise InputError("formality input must be over Q")
    if not A.is_minimal:
        raise InputError("formality test needs a minimal structure (m_1 = 0)")
    if not check_stasheff(A, default_check_bound(A)).ok:
        raise InputError("input fails the Stasheff identities")
    return A


def run_formality(data, levels: int) -> Dict[str, Any]:
    A = formality_input(data)
    r = formality_test(A, levels)
    V = A.bar_module
    log = []
    payload: Dict[str, Any] = {"input": data, "levels": levels}
    if isinstance(r, FormalityCertificate):
        for n, g in enumerate(r.gauge_sequence, 1):
            log.append("level %d: deviation at arity %d, gauge g_%d %s"
                       % (n, n + 2, n + 1, "zero" if g.is_zero() else "with %d terms" % len(g)))
        payload["certificate"] = {"level": r.level, "fully_formal": r.fully_formal,
                                  "gauge_sequence": [S.map_to_json(g) for g in r.gauge_sequence]}
        if r.fully_formal:
            f = extract_quasi_iso(r)
            payload["quasi_iso"] = {"components": S.maps_to_json(f.components)}
            log.append("fully formal: quasi-isomorphism to A(2) extracted and verified")
            verdict = "FULLY_FORMAL"
        else:
            log.append("%d-formal; the degree range does not bound higher levels" % levels)
            verdict = "N_FORMAL"
    else:
        for n, g in enumerate(r.gauge_sequence, 1):
            log.append("level %d: deviation at arity %d is a coboundary" % (n, n + 2))
        log.append("level %d: deviation at arity %d is not a coboundary" % (r.level, r.level + 2))
        A2 = A.truncation()
        dev = Coderivation(V, 1, {r.level + 2: r.component})
        _, _, _, rows, _ = boundary_system(A2, 0, [r.level + 1], dev)
        payload["obstruction"] = {"level": r.level, "component": S.map_to_json(r.component),
                                  "gauge_sequence": [S.map_to_json(g) for g in r.gauge_sequence],
                                  "certificate": _labeled_cert(r.certificate, rows, V)}
        verdict = "OBSTRUCTED"
    return make_report("formality", verdict, payload, log)


def _gauges_from_json(objs, V) -> List[MultiMap]:
    out = []
    for i, o in enumerate(objs):
        out.append(S.map_from_json(o, lambda n: 0, V, V, QQ, "gauge_sequence[%d]" % i))
    return out


def _cone_after(A: AInftyStructure, gs: List[MultiMap], N: int) -> Tuple[Coderivation, CoalgebraMorphism]:
    cone = normal_cone(A, N).structure
    bound = N + 2
    ring = cone.ring
    cur = cone.bar().truncate(bound)
    comp = CoalgebraMorphism.identity(A.bar_module, ring)
    for n, g in enumerate(gs, 1):
        if g.is_zero():
            continue
        E = exp_coderivation(lift_coeffs(Coderivation(A.bar_module, 0, {g.arity: g}), ring, n), bound)
        comp = E.compose(comp, bound)
    cur = conjugate(comp, cur, bound)
    return cur, comp


def verify_formality(rep) -> bool:
    p = rep["payload"]
    A = formality_input(p["input"])
    V = A.bar_module
    N = p["levels"]
    if rep["verdict"] in ("FULLY_FORMAL", "N_FORMAL"):
        c = p["certificate"]
        gs = _gauges_from_json(c["gauge_sequence"], V)
        if len(gs) != N or any(g.arity != n + 1 for n, g in enumerate(gs, 1) if not g.is_zero()):
            return False
        cur, _ = _cone_after(A, gs, N)
        target = A.truncation().bar().map_coeffs(lambda v: HPoly.const(v, N))
        if cur != target.truncate(N + 2):
            return False
        if rep["verdict"] == "FULLY_FORMAL":
            f = S.morphism_from_json({"components": p["quasi_iso"]["components"],
                                      "target": S.structure_to_json(A.truncation())}, A)
            cert = FormalityCertificate(N, gs, None, True, A)
            ref = extract_quasi_iso(cert)
            if ref.components != f.components:
                return False
        return True
    o = p["obstruction"]
    n = o["level"]
    gs = _gauges_from_json(o["gauge_sequence"], V)
    cur, _ = _cone_after(A, gs, n)
    dev = h_coefficient(cur, n)
    comp = S.map_from_json(o["component"], lambda k: 1, V, V, QQ, "component")
    if dev != Coderivation(V, 1, {comp.arity: comp}) or comp.arity != n + 2:
        return False
    return _check_labeled_cert(o["certificate"], A.truncation(), [n + 1], dev, None)


# lie-gauge --------------------------------------------------------------------------


def lie_gauge_input(data, levels: Optional[int], bound: Optional[int]):
    """(L, d, pi, description) from either a lie/mc file or an A-infinity file."""
    if "lie" in data:
        ring = S.ring_from_json(data.get("ring"))
        if ring.truncation is None:
            raise InputError("ring: MC elements need Q[h]/h^(N+1)")
        L, d, M = lie_from_json(data)
        if d is None:
            raise InputError("lie.differential: required for lie-gauge")
        mc = data.get("mc", {}).get("pi", [])
        pi = MCElement(S.vector_from_json(mc, M, ring, "mc.pi"), ring.truncation)
        if not check_mc(L, d, pi):
            raise InputError("mc.pi: not a Maurer-Cartan element (d pi + [pi,pi]/2 != 0 or wrong degree)")
        return L, d, pi, {"source": "lie"}
    A = S.structure_from_json(data)
    if A.ring != QQ or not A.is_minimal:
        raise InputError("Hochschild slice needs a minimal structure over Q")
    N = 1 if levels is None else levels
    K = N + 2 if bound is None else bound
    sl = hochschild_as_dglie(A, K)
    return sl.lie, sl.d, sl.normal_cone_mc(N), {"source": "hochschild_slice", "arity_bound": K, "levels": N}


def run_lie_gauge(data, levels: Optional[int], bound: Optional[int]) -> Dict[str, Any]:
    L, d, pi, desc = lie_gauge_input(data, levels, bound)
    M = L.module
    k = lie_kaledin_class(L, d, pi)
    t = k.trivialization
    payload = {"input": data, "levels": levels, "arity_bound": bound, "setting": desc,
               "kaledin_cocycle": S.vector_to_json(k.cocycle, M),
               "factors": [S.vector_to_json(xi, M) for xi in t.gauge.factors]}
    log = ["graded Lie algebra of dimension %d, MC element over Q[h]/h^%d" % (M.dim, pi.N + 1)]
    if t.ok:
        log.append("gauge trivialization found with %d factors" % len(t.gauge.factors))
        verdict = "GAUGE_TRIVIAL"
    else:
        _, src, tgt = _restricted_matrix(L, d, 0, 1)
        y = {tgt[r]: c for r, c in t.certificate.y.items()}
        payload["obstruction"] = {"level": t.level, "layer": S.vector_to_json(t.obstruction, M),
                                  "certificate": {"y": S.vector_to_json(y, M),
                                                  "value": format_rational(t.certificate.value)}}
        log.append("level %d: d(xi) = pi_%d has no solution" % (t.level, t.level))
        verdict = "GAUGE_OBSTRUCTED"
    return make_report("lie-gauge", verdict, payload, log)


def verify_lie_gauge(rep) -> bool:
    p = rep["payload"]
    L, d, pi, _ = lie_gauge_input(p["input"], p["levels"], p["arity_bound"])
    M = L.module
    factors = [S.vector_from_json(f, M, QQ, "factors[%d]" % i) for i, f in enumerate(p["factors"])]
    if any(M.degree(i) != 0 for f in factors for i in f):
        return False
    if rep["verdict"] == "GAUGE_TRIVIAL":
        g = GaugeElement(factors)
        return gauge_act(L, g, twisted(L, d, pi), pi.ring) == LieDerivation(lift_map(d.map, pi.ring))
    o = p["obstruction"]
    n = o["level"]
    cur = gauge_act_mc(L, d, GaugeElement(factors), pi)
    if any(layer(cur.pi, j) for j in range(1, n)):
        return False
    target = layer(cur.pi, n)
    y = S.vector_from_json(o["certificate"]["y"], M, QQ, "certificate.y")
    value = parse_rational(o["certificate"]["value"])
    if any(M.degree(i) != 1 for i in y):
        return False
    for i in L.degree_part(0):
        if dot(y, d({i: 1})):
            return False
    return value != 0 and dot(y, target) == value


VERIFIERS = {"check": verify_check, "transfer": verify_transfer, "hh": verify_hh, "kaledin": verify_kaledin,
             "formality": verify_formality, "lie-gauge": verify_lie_gauge}


def verify_report(rep: Dict[str, Any]) -> bool:
    cmd = rep.get("command")
    if cmd not in VERIFIERS:
        raise InputError("unknown report command %r" % cmd)
    return VERIFIERS[cmd](rep)
