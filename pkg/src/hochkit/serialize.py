"""JSON interchange: algebra files, Lie data and certificate payloads.

Scalars are strings ("p/q" or "p"); over Q[h]/h^(N+1) a scalar is a list of
such strings indexed by h-power.  Errors carry a JSON path such as
``m[0].entries[3].coeff`` (and a line number for syntax errors).
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Optional, Tuple

from .ainfty import AInftyMorphism, AInftyStructure, Coderivation
from .errors import InputError
from .graded import DegreeError, GradedModule, MultiMap
from .ring import QQ, Ring, format_scalar, parse_scalar

FORMAT_VERSION = 1


def _fail(path: str, msg: str):
    raise InputError("%s: %s" % (path, msg) if path else msg)


def loads(text: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError("line %d, column %d: %s" % (e.lineno, e.colno, e.msg)) from None
    if not isinstance(data, dict):
        _fail("", "top level must be a JSON object")
    return data


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ring and module ---------------------------------------------------------------


def ring_to_json(ring: Ring) -> Dict[str, Any]:
    if ring.truncation is None:
        return {"kind": "Q"}
    return {"kind": "Q[h]", "truncation": ring.truncation}


def ring_from_json(obj, path="ring") -> Ring:
    if obj is None:
        return QQ
    if not isinstance(obj, dict) or "kind" not in obj:
        _fail(path, 'expected {"kind": "Q"} or {"kind": "Q[h]", "truncation": N}')
    if obj["kind"] == "Q":
        return QQ
    if obj["kind"] == "Q[h]":
        N = obj.get("truncation")
        if not isinstance(N, int) or isinstance(N, bool) or N < 0:
            _fail(path + ".truncation", "must be an integer >= 0")
        return Ring(N)
    _fail(path + ".kind", "unknown ring %r" % obj["kind"])


def module_to_json(M: GradedModule) -> List[Dict[str, Any]]:
    return [{"name": n, "degree": d} for n, d in M.basis]


def module_from_json(obj, path="module") -> GradedModule:
    if not isinstance(obj, list):
        _fail(path, "expected a list of {name, degree}")
    pairs = []
    for i, e in enumerate(obj):
        p = "%s[%d]" % (path, i)
        if not isinstance(e, dict) or "name" not in e or "degree" not in e:
            _fail(p, "expected {name, degree}")
        if not isinstance(e["name"], str):
            _fail(p + ".name", "must be a string")
        if not isinstance(e["degree"], int) or isinstance(e["degree"], bool):
            _fail(p + ".degree", "must be an integer")
        pairs.append((e["name"], e["degree"]))
    try:
        return GradedModule(tuple(pairs))
    except ValueError as e:
        _fail(path, str(e))


# maps --------------------------------------------------------------------------


def entries_to_json(f: MultiMap) -> List[Dict[str, Any]]:
    return [{"inputs": ins, "output": out, "coeff": format_scalar(c)} for ins, out, c in f.named_terms()]


def map_to_json(f: MultiMap) -> Dict[str, Any]:
    return {"arity": f.arity, "entries": entries_to_json(f)}


def map_from_json(obj, degree_of, source: GradedModule, target: GradedModule, ring: Ring,
                  path: str, arity: Optional[int] = None) -> MultiMap:
    if not isinstance(obj, dict):
        _fail(path, "expected {arity, entries}")
    n = obj.get("arity", arity)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail(path + ".arity", "must be an integer >= 1")
    ents = obj.get("entries", [])
    if not isinstance(ents, list):
        _fail(path + ".entries", "expected a list")
    acc: Dict[tuple, Dict[int, Any]] = {}
    for i, e in enumerate(ents):
        p = "%s.entries[%d]" % (path, i)
        if not isinstance(e, dict):
            _fail(p, "expected {inputs, output, coeff}")
        ins = e.get("inputs")
        if not isinstance(ins, list) or len(ins) != n:
            _fail(p + ".inputs", "expected a list of %d names" % n)
        try:
            key = tuple(source.index(x) for x in ins)
            j = target.index(e.get("output"))
        except (KeyError, TypeError) as err:
            _fail(p, str(err).strip('"'))
        try:
            c = parse_scalar(e.get("coeff"), ring)
        except (ValueError, TypeError, ZeroDivisionError) as err:
            _fail(p + ".coeff", str(err))
        row = acc.setdefault(key, {})
        row[j] = row[j] + c if j in row else c
    try:
        return MultiMap(n, degree_of(n), source, target, acc)
    except DegreeError as err:
        _fail(path, str(err))


def maps_from_json(obj, degree_of, source, target, ring, path) -> Dict[int, MultiMap]:
    if obj is None:
        return {}
    if not isinstance(obj, list):
        _fail(path, "expected a list of maps")
    out: Dict[int, MultiMap] = {}
    for i, e in enumerate(obj):
        f = map_from_json(e, degree_of, source, target, ring, "%s[%d]" % (path, i))
        out[f.arity] = out[f.arity] + f if f.arity in out else f
    return out


def maps_to_json(comps: Dict[int, MultiMap]) -> List[Dict[str, Any]]:
    return [map_to_json(f) for n, f in sorted(comps.items()) if not f.is_zero()]


# structures ----------------------------------------------------------------------


def structure_to_json(A: AInftyStructure) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "ring": ring_to_json(A.ring),
        "module": module_to_json(A.module),
        "m": maps_to_json(A.components),
    }


def structure_from_json(data: Dict[str, Any], path: str = "") -> AInftyStructure:
    pre = path + "." if path else ""
    v = data.get("format_version", FORMAT_VERSION)
    if v != FORMAT_VERSION:
        _fail(pre + "format_version", "unsupported version %r" % v)
    if "module" not in data:
        _fail(path, 'missing "module" (not an algebra file?)')
    ring = ring_from_json(data.get("ring"), pre + "ring")
    M = module_from_json(data["module"], pre + "module")
    comps = maps_from_json(data.get("m", []), lambda n: 2 - n, M, M, ring, pre + "m")
    return AInftyStructure(M, comps, ring)


def morphism_to_json(f: AInftyMorphism) -> Dict[str, Any]:
    return {"target": structure_to_json(f.target), "components": maps_to_json(f.components)}


def morphism_from_json(obj, source: AInftyStructure, path="morphism") -> AInftyMorphism:
    if not isinstance(obj, dict):
        _fail(path, "expected {target, components}")
    target = structure_from_json(obj["target"], path + ".target") if "target" in obj else source
    comps = maps_from_json(obj.get("components", []), lambda n: 1 - n, source.module, target.module,
                           source.ring, path + ".components")
    return AInftyMorphism(source, target, comps)


def coderivation_to_json(c: Coderivation) -> Dict[str, Any]:
    return {"degree": c.degree, "components": maps_to_json(c.components)}


def coderivation_from_json(obj, module: GradedModule, ring: Ring, path: str) -> Coderivation:
    if not isinstance(obj, dict) or "degree" not in obj:
        _fail(path, "expected {degree, components}")
    deg = obj["degree"]
    comps = maps_from_json(obj.get("components", []), lambda n: deg, module, module, ring, path + ".components")
    return Coderivation(module, deg, comps, ring)


# vectors ----------------------------------------------------------------------------


def vector_to_json(v: Dict[int, Any], M: GradedModule) -> List[Dict[str, Any]]:
    return [{"element": M.name(i), "coeff": format_scalar(c)} for i, c in sorted(v.items()) if c]


def vector_from_json(obj, M: GradedModule, ring: Ring, path: str) -> Dict[int, Any]:
    if not isinstance(obj, list):
        _fail(path, "expected a list of {element, coeff}")
    out: Dict[int, Any] = {}
    for i, e in enumerate(obj):
        p = "%s[%d]" % (path, i)
        if not isinstance(e, dict):
            _fail(p, "expected {element, coeff}")
        try:
            k = M.index(e.get("element"))
        except (KeyError, TypeError) as err:
            _fail(p + ".element", str(err).strip('"'))
        try:
            c = parse_scalar(e.get("coeff"), ring)
        except (ValueError, TypeError, ZeroDivisionError) as err:
            _fail(p + ".coeff", str(err))
        out[k] = out[k] + c if k in out else c
    return {k: c for k, c in out.items() if c}


def labeled_vector_to_json(v: Dict[int, Any], labels: List[Tuple[Tuple[int, ...], int]],
                           M: GradedModule) -> List[Dict[str, Any]]:
    """Vector indexed by (inputs, output) basis labels, e.g. Fredholm row vectors."""
    out = []
    for i, c in sorted(v.items()):
        if c:
            key, j = labels[i]
            out.append({"inputs": [M.name(x) for x in key], "output": M.name(j), "coeff": format_scalar(c)})
    return out


def labeled_vector_from_json(obj, M: GradedModule, ring: Ring, path: str) -> Dict[Tuple[Tuple[int, ...], int], Any]:
    if not isinstance(obj, list):
        _fail(path, "expected a list")
    out = {}
    for i, e in enumerate(obj):
        p = "%s[%d]" % (path, i)
        try:
            key = tuple(M.index(x) for x in e["inputs"])
            j = M.index(e["output"])
            out[(key, j)] = parse_scalar(e["coeff"], ring)
        except (KeyError, TypeError, ValueError) as err:
            _fail(p, str(err).strip('"'))
    return out
