"""JSON encoding of every value type.  Coefficients are exact fraction strings."""

from __future__ import annotations

import json
from typing import Any

from gmpy2 import mpq

from .chord import DKElem
from .derivations import TAut, TDer, is_special
from .lie import AssElem, CycElem, LieElem, TruncationContext, fmt_scalar, is_lyndon


class ParseError(ValueError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _key(w) -> str:
    return ".".join(str(l) for l in w)


def _parse_key(s: str) -> tuple[int, ...]:
    if s == "":
        return ()
    try:
        return tuple(int(p) for p in s.split("."))
    except ValueError:
        raise ParseError(f"bad word key {s!r}") from None


def _parse_coeff(s) -> mpq:
    if not isinstance(s, str):
        raise ParseError(f"coefficient must be a fraction string, got {s!r}")
    try:
        return mpq(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad coefficient {s!r}") from None


def _ctx_fields(ctx: TruncationContext) -> dict:
    return {"generators": ctx.n_generators, "offset": ctx.offset, "max_degree": ctx.max_degree}


def _ctx_from(obj: dict) -> TruncationContext:
    try:
        n, off, N = obj["generators"], obj["offset"], obj["max_degree"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field {exc}") from None
    if not isinstance(n, int) or not isinstance(N, int) or not isinstance(off, bool):
        raise ParseError("generators/max_degree must be integers and offset a boolean")
    try:
        return TruncationContext(n, N, off)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def element_to_json(e) -> dict:
    terms = sorted(e.terms().items(), key=lambda t: (len(t[0]), t[0]))
    return {
        "kind": e.kind,
        **_ctx_fields(e.ctx),
        "terms": [{"key": _key(w), "coeff": fmt_scalar(c)} for w, c in terms],
    }


def element_from_json(obj: dict):
    if not isinstance(obj, dict):
        raise ParseError("element must be a JSON object")
    kind = obj.get("kind")
    ctx = _ctx_from(obj)
    raw = obj.get("terms")
    if not isinstance(raw, list):
        raise ParseError("terms must be a list")
    terms = {}
    for t in raw:
        if not isinstance(t, dict) or "key" not in t or "coeff" not in t:
            raise ParseError(f"bad term {t!r}")
        w = _parse_key(t["key"])
        if any(l not in ctx.letters for l in w) or len(w) > ctx.max_degree:
            raise ParseError(f"word {t['key']!r} outside the context")
        terms[w] = _parse_coeff(t["coeff"])
    if kind == "lie":
        if any(not is_lyndon(w) for w in terms):
            raise ParseError("lie keys must be Lyndon words")
        return LieElem.from_lyndon(ctx, terms)
    if kind == "ass":
        return AssElem(ctx, terms)
    if kind == "cyc":
        return CycElem(ctx, terms)
    raise ParseError(f"unknown element kind {kind!r}")


def tder_to_json(u: TDer) -> dict:
    kind = "sder" if is_special(u)[0] else "tder"
    return {"kind": kind, **_ctx_fields(u.ctx), "slots": [element_to_json(s) for s in u.slots]}


def taut_to_json(F: TAut) -> dict:
    kind = "saut" if is_special(F.log)[0] else "taut"
    return {"kind": kind, **_ctx_fields(F.ctx), "slots": [element_to_json(s) for s in F.conjugators]}


def _slots_from(obj: dict, kind: str):
    ctx = _ctx_from(obj)
    slots = obj.get("slots")
    if not isinstance(slots, list) or len(slots) != ctx.n_generators:
        raise ParseError("slots must list one element per generator")
    elems = [element_from_json(s) for s in slots]
    for e in elems:
        if e.ctx != ctx:
            raise ParseError("slot context differs from the container")
        if e.kind != kind:
            raise ParseError(f"slots must be {kind} elements")
    return ctx, elems


def tder_from_json(obj: dict) -> TDer:
    ctx, elems = _slots_from(obj, "lie")
    return TDer(ctx, elems)


def taut_from_json(obj: dict) -> TAut:
    ctx, elems = _slots_from(obj, "ass")
    try:
        return TAut.from_conjugators(ctx, elems)
    except ValueError as exc:
        raise ParseError(f"not a tangential automorphism: {exc}") from None


def dk_to_json(a: DKElem) -> dict:
    return {
        "kind": "dk",
        "arity": a.arity,
        "shifted": a.shifted,
        "rep": tder_to_json(a.rep),
        "formal": a.formal,
    }


def dk_from_json(obj: dict) -> DKElem:
    a = DKElem(tder_from_json(obj["rep"]), obj.get("formal", ""))
    if a.arity != obj.get("arity") or a.shifted != obj.get("shifted"):
        raise ParseError("dk arity/shift does not match its representative")
    return a


def residual_to_json(r) -> dict:
    defect = None
    if r.defect is not None:
        defect = tder_to_json(r.defect) if isinstance(r.defect, TDer) else element_to_json(r.defect)
    return {
        "equation": r.equation,
        "pass": r.passed,
        "first_nonzero_degree": r.first_nonzero_degree,
        "defect": defect,
    }


def residual_from_json(obj: dict):
    from .equations import Residual

    d = obj.get("defect")
    defect = None
    if d is not None:
        defect = tder_from_json(d) if d.get("kind") in ("tder", "sder") else element_from_json(d)
    return Residual(obj["equation"], bool(obj["pass"]), obj["first_nonzero_degree"], defect)


def associator_to_json(a) -> dict:
    free = [{"degree": d, "words": [_key(w) for w in ws]} for d, ws in a.free]
    return {
        "kind": "associator",
        "mu": fmt_scalar(a.mu),
        "max_degree": a.max_degree,
        "f": element_to_json(a.f),
        "free": free,
    }


def associator_from_json(obj: dict):
    from .equations import AssociatorData

    free = tuple((int(e["degree"]), tuple(_parse_key(w) for w in e["words"])) for e in obj.get("free", []))
    return AssociatorData(_parse_coeff(obj["mu"]), _lie_from(obj["f"]), free)


def moperad_to_json(m) -> dict:
    return {
        "kind": "moperad",
        "mu": fmt_scalar(m.mu),
        "max_degree": m.max_degree,
        "f": element_to_json(m.f),
        "g": element_to_json(m.g),
    }


def moperad_from_json(obj: dict):
    from .equations import MoperadIsoData

    return MoperadIsoData(_parse_coeff(obj["mu"]), _lie_from(obj["f"]), _lie_from(obj["g"]))


def gt1_to_json(e) -> dict:
    return {
        "kind": "gt1",
        "lambda": fmt_scalar(e.lam),
        "max_degree": e.max_degree,
        "f": element_to_json(e.f),
        "g": element_to_json(e.g),
    }


def gt1_from_json(obj: dict):
    from .equations import GT1Element

    f, g = element_from_json(obj["f"]), element_from_json(obj["g"])
    if f.kind != "ass" or g.kind != "ass":
        raise ParseError("gt1 components must be associative elements")
    return GT1Element(_parse_coeff(obj["lambda"]), f, g)


def kvsolution_to_json(s) -> dict:
    return {
        "kind": "kvsolution",
        "arity": s.F.arity,
        "max_degree": s.F.ctx.max_degree,
        "taut": taut_to_json(s.F),
        "duflo": [fmt_scalar(c) for c in s.h],
    }


def kvsolution_from_json(obj: dict):
    from .kv import KVSolution

    F = taut_from_json(obj["taut"])
    h = tuple(_parse_coeff(c) for c in obj["duflo"])
    return KVSolution(F, h)


def _lie_from(obj) -> LieElem:
    e = element_from_json(obj)
    if not isinstance(e, LieElem):
        raise ParseError("expected a lie element")
    return e


def to_json(x) -> dict:
    from .equations import AssociatorData, GT1Element, MoperadIsoData, Residual
    from .kv import KVSolution

    if isinstance(x, (LieElem, AssElem, CycElem)):
        return element_to_json(x)
    if isinstance(x, TDer):
        return tder_to_json(x)
    if isinstance(x, TAut):
        return taut_to_json(x)
    if isinstance(x, DKElem):
        return dk_to_json(x)
    if isinstance(x, Residual):
        return residual_to_json(x)
    if isinstance(x, AssociatorData):
        return associator_to_json(x)
    if isinstance(x, MoperadIsoData):
        return moperad_to_json(x)
    if isinstance(x, GT1Element):
        return gt1_to_json(x)
    if isinstance(x, KVSolution):
        return kvsolution_to_json(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


_READERS = {
    "lie": element_from_json,
    "ass": element_from_json,
    "cyc": element_from_json,
    "tder": tder_from_json,
    "sder": tder_from_json,
    "taut": taut_from_json,
    "saut": taut_from_json,
    "dk": dk_from_json,
    "associator": associator_from_json,
    "moperad": moperad_from_json,
    "gt1": gt1_from_json,
    "kvsolution": kvsolution_from_json,
}


def from_json(obj):
    """Decode any value produced by to_json; raises ParseError on malformed input."""
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object")
    if "equation" in obj:
        try:
            return residual_from_json(obj)
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed residual: {exc}") from None
    reader = _READERS.get(obj.get("kind"))
    if reader is None:
        raise ParseError(f"unknown kind {obj.get('kind')!r}")
    try:
        return reader(obj)
    except ParseError:
        raise
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise ParseError(f"malformed {obj.get('kind')} object: {exc}") from None


def loads(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return from_json(obj)
