"""Drinfeld-Kohno Lie algebras realized inside special derivations.

The generator t_ij is represented by the special derivation t^ij with x_j in
slot i and x_i in slot j.  Equality is decided on these representatives.
Shifted algebras carry the extra frozen strand 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import _poly as P
from .derivations import TAut, TDer, is_special, tder_bracket, tder_compose
from .lie import LieElem, TruncationContext, lie_eval


def dk_context(n: int, max_degree: int, shifted: bool = False) -> TruncationContext:
    """Context for arity n: letters 1..n, or 0..n when shifted."""
    return TruncationContext(n + 1 if shifted else n, max_degree, shifted)


@dataclass(frozen=True, eq=False)
class DKElem:
    rep: TDer
    formal: str = field(default="", compare=False)

    @property
    def shifted(self) -> bool:
        return self.rep.ctx.offset

    @property
    def arity(self) -> int:
        n = self.rep.ctx.n_generators
        return n - 1 if self.shifted else n

    @property
    def ctx(self) -> TruncationContext:
        return self.rep.ctx

    def __add__(self, other: "DKElem") -> "DKElem":
        return DKElem(self.rep + other.rep, _join(self.formal, "+", other.formal))

    def __sub__(self, other: "DKElem") -> "DKElem":
        return DKElem(self.rep - other.rep, _join(self.formal, "-", other.formal))

    def __neg__(self) -> "DKElem":
        return DKElem(-self.rep, f"-({self.formal})" if self.formal else "")

    def scaled(self, s) -> "DKElem":
        return DKElem(self.rep.scaled(s), f"{s}*({self.formal})" if self.formal else "")

    def __eq__(self, other):
        return isinstance(other, DKElem) and self.rep == other.rep

    def __hash__(self):
        return hash(self.rep)

    def is_zero(self) -> bool:
        return self.rep.is_zero()


def _join(a: str, op: str, b: str) -> str:
    return f"{a}{op}{b}" if a and b else ""


def t_gen(n: int, i: int, j: int, max_degree: int, shifted: bool = False) -> DKElem:
    """The generator t_ij of t_n (t_n^+ when shifted); t_ij = t_ji."""
    lo = 0 if shifted else 1
    if i == j or not (lo <= i <= n and lo <= j <= n):
        raise ValueError(f"invalid generator indices ({i},{j}) for arity {n}")
    ctx = dk_context(n, max_degree, shifted)
    slots: list[dict] = [{} for _ in ctx.letters]
    slots[i - ctx.start] = {(j,): P.ONE}
    slots[j - ctx.start] = {(i,): P.ONE}
    return DKElem(TDer(ctx, slots), f"t{min(i, j)}{max(i, j)}")


def dk_zero(n: int, max_degree: int, shifted: bool = False) -> DKElem:
    return DKElem(TDer.zero(dk_context(n, max_degree, shifted)), "0")


def dk_bracket(a: DKElem, b: DKElem) -> DKElem:
    f = f"[{a.formal},{b.formal}]" if a.formal and b.formal else ""
    return DKElem(tder_bracket(a.rep, b.rep), f)


def dk_compose(a: DKElem, alpha: int, b: DKElem) -> DKElem:
    """Operadic composition, computed through the special derivation model."""
    return DKElem(tder_compose(a.rep, alpha, b.rep))


def case_formula(i: int, j: int, alpha: int, m: int) -> list[tuple[int, int]]:
    """Generators summing to t_ij o_alpha 0, with 0 of arity m (explicit case analysis)."""
    i, j = min(i, j), max(i, j)
    if alpha < i:
        return [(i + m - 1, j + m - 1)]
    if alpha == i:
        return [(i + b - 1, j + m - 1) for b in range(1, m + 1)]
    if i < alpha < j:
        return [(i, j + m - 1)]
    if alpha == j:
        return [(i, j + b - 1) for b in range(1, m + 1)]
    return [(i, j)]


def zero_compose_formula(k: int, l: int, alpha: int) -> tuple[int, int]:
    """The generator 0 o_alpha t_kl."""
    return (k + alpha - 1, l + alpha - 1)


def eval_t_series(f: LieElem, args: Sequence[DKElem]) -> TDer:
    """Evaluate a Lie series at Drinfeld-Kohno elements (the result is special)."""
    letters = list(f.ctx.letters)
    if len(args) != len(letters):
        raise ValueError("need one argument per letter")
    ctx = args[0].rep.ctx
    if any(a.rep.ctx != ctx for a in args):
        raise ValueError("arguments must share an arity")
    if f.ctx.max_degree < ctx.max_degree:
        raise ValueError("series truncated below the target degree")
    images = {l: a.rep for l, a in zip(letters, args)}
    return lie_eval(f.truncated(ctx.max_degree), images, tder_bracket, TDer.zero(ctx))


def eval_t_group(f: LieElem, args: Sequence[DKElem]) -> TAut:
    """exp of eval_t_series: the group-like element e^{f(args)}."""
    return TAut(eval_t_series(f, args))


def center(n: int, max_degree: int, shifted: bool = False) -> DKElem:
    lo = 0 if shifted else 1
    acc = dk_zero(n, max_degree, shifted)
    for i in range(lo, n + 1):
        for j in range(i + 1, n + 1):
            acc = acc + t_gen(n, i, j, max_degree, shifted)
    return acc


def _plus_ctx(ctx: TruncationContext) -> TruncationContext:
    if ctx.offset:
        raise ValueError("expected an unshifted context")
    return TruncationContext(ctx.n_generators + 1, ctx.max_degree, True)


def _lift(p: dict) -> dict:
    # polys over letters 1..n are already valid over 0..n
    return p


def kappa(a: LieElem) -> TDer:
    """The Lie homomorphism x_i -> t^{0i} into shifted special derivations."""
    n = a.ctx.n_generators
    N = a.ctx.max_degree
    gens = {i: t_gen(n, 0, i, N, shifted=True).rep for i in a.ctx.letters}
    return lie_eval(a, gens, tder_bracket, TDer.zero(_plus_ctx(a.ctx)))


def lambda_map(a: LieElem) -> TDer:
    """lambda(a) = (a, 0, ..., 0)."""
    ctx = _plus_ctx(a.ctx)
    return TDer(ctx, [_lift(a._p)] + [{}] * a.ctx.n_generators)


def plus(u: TDer) -> TDer:
    """u^+ = (0, u_1, ..., u_n)."""
    ctx = _plus_ctx(u.ctx)
    return TDer(ctx, [{}] + [_lift(s) for s in u.slot_polys()])


def iota(a: LieElem, u: TDer) -> TDer:
    """kappa(a) + u^+ for special u."""
    ok, deg = is_special(u)
    if not ok:
        raise ValueError(f"derivation is not special (degree {deg})")
    return kappa(a) + plus(u)


def eta(a: LieElem, d: TDer) -> TDer:
    """lambda(a) + d^+ for tangential d."""
    return lambda_map(a) + plus(d)


def semidirect_embed(a: LieElem, u: TDer, flavor: str = "special") -> TDer:
    if flavor == "special":
        return iota(a, u)
    if flavor == "tangential":
        return eta(a, u)
    raise ValueError(f"unknown flavor {flavor!r}")


def unshift_slot0(x: TDer) -> LieElem:
    """Slot 0 of a shifted derivation, read as a Lie series in x_0..x_n."""
    return LieElem(x.ctx, x.slot_polys()[0], check=False)


def moperad_compose0(x: TDer, y: TDer) -> TDer:
    """The slot-0 composition of two shifted derivations."""
    if not (x.ctx.offset and y.ctx.offset):
        raise ValueError("slot-0 composition needs shifted arguments")
    return tder_compose(x, 0, y)


def moperad_unit(max_degree: int) -> TDer:
    return TDer.zero(TruncationContext(1, max_degree, True))


def _drop_zero(p: dict) -> dict:
    return {w: c for w, c in p.items() if 0 not in w}


def _unshift(x: TDer) -> TruncationContext:
    return TruncationContext(x.ctx.n_generators - 1, x.ctx.max_degree, False)


def iota_preimage(x: TDer):
    """(a, u) with iota(a, u) = x, or None when x is outside the image."""
    if not x.ctx.offset:
        raise ValueError("expected a shifted derivation")
    ctx = _unshift(x)
    a = LieElem(ctx, _drop_zero(x.slot_polys()[0]), check=False)
    rest = x - kappa(a)
    slots = rest.slot_polys()
    if slots[0] or any(_drop_zero(s) != s for s in slots[1:]):
        return None
    u = TDer(ctx, slots[1:])
    if not is_special(u)[0]:
        return None
    return a, u


def eta_preimage(x: TDer):
    """(a, d) with eta(a, d) = x, or None when x is outside the image."""
    if not x.ctx.offset:
        raise ValueError("expected a shifted derivation")
    slots = x.slot_polys()
    if any(_drop_zero(s) != s for s in slots):
        return None
    ctx = _unshift(x)
    return LieElem(ctx, slots[0], check=False), TDer(ctx, slots[1:])
