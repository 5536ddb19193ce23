"""Tangential derivations and automorphisms of free Lie algebras.

A tangential derivation u = (a_1, ..., a_n) acts by x_i -> [x_i, a_i].  A
tangential automorphism is stored through its logarithm u; its conjugator
tuple (f_i with x_i -> f_i^-1 x_i f_i) is extracted on demand.
"""

from __future__ import annotations

from math import factorial
from typing import Sequence

from gmpy2 import mpq

from . import _poly as P
from ._poly import Poly
from .lie import (
    AssElem,
    ContextMismatch,
    CycElem,
    LieElem,
    NotLieError,
    TruncationContext,
    _compose_maps,
    bch_coordinates,
    compose_zero_left,
    compose_zero_right,
    lie_elem,
    perm_act,
    scalar,
    standard_factorization,
)


def _gen_images(ctx: TruncationContext, slots: Sequence[Poly], n: int) -> dict[int, Poly]:
    """Images x_l -> [x_l, a_l] of the derivation with the given slots."""
    out = {}
    for l, a in zip(ctx.letters, slots):
        if a:
            out[l] = P.commutator({(l,): P.ONE}, a, n)
    return out


class TDer:
    """Tangential derivation in canonical form (no x_i term in slot i)."""

    __slots__ = ("ctx", "_slots", "_imgs")

    def __init__(self, ctx: TruncationContext, slots: Sequence, normalize: bool = True):
        if len(slots) != ctx.n_generators:
            raise ValueError("need one slot per generator")
        polys = []
        for l, s in zip(ctx.letters, slots):
            if isinstance(s, LieElem):
                if s.ctx != ctx:
                    raise ContextMismatch("slot context differs")
                p = s._p
            else:
                p = P.truncate(P.clean(s), ctx.max_degree)
            if normalize and (l,) in p:
                p = dict(p)
                del p[(l,)]
            polys.append(p)
        self.ctx = ctx
        self._slots = tuple(polys)
        self._imgs = None

    @classmethod
    def zero(cls, ctx: TruncationContext) -> "TDer":
        return cls(ctx, [{}] * ctx.n_generators)

    @property
    def slots(self) -> tuple[LieElem, ...]:
        return tuple(lie_elem(self.ctx, p) for p in self._slots)

    def slot_polys(self) -> tuple[Poly, ...]:
        return self._slots

    @property
    def arity(self) -> int:
        return self.ctx.n_generators

    def images(self, n: int | None = None) -> dict[int, Poly]:
        """Generator images x_l -> [x_l, a_l], truncated at n (default: one above)."""
        n = self.ctx.max_degree + 1 if n is None else n
        if n == self.ctx.max_degree + 1:
            if self._imgs is None:
                self._imgs = _gen_images(self.ctx, self._slots, n)
            return self._imgs
        return _gen_images(self.ctx, self._slots, n)

    def _new(self, polys):
        return TDer(self.ctx, polys)

    def __add__(self, other: "TDer") -> "TDer":
        _same(self, other)
        return self._new([P.add(a, b) for a, b in zip(self._slots, other._slots)])

    def __sub__(self, other: "TDer") -> "TDer":
        _same(self, other)
        return self._new([P.add(a, P.neg(b)) for a, b in zip(self._slots, other._slots)])

    def __neg__(self) -> "TDer":
        return self._new([P.neg(a) for a in self._slots])

    def scaled(self, s) -> "TDer":
        s = scalar(s)
        return self._new([P.scale(a, s) for a in self._slots])

    def __rmul__(self, s):
        return self.scaled(s)

    def __eq__(self, other):
        return isinstance(other, TDer) and self.ctx == other.ctx and self._slots == other._slots

    def __hash__(self):
        return hash((self.ctx, tuple(frozenset(s.items()) for s in self._slots)))

    def is_zero(self) -> bool:
        return not any(self._slots)

    def degree_part(self, d: int) -> "TDer":
        return self._new([P.degree_part(a, d) for a in self._slots])

    def min_degree(self) -> int | None:
        return min((d for d in (P.min_degree(a) for a in self._slots) if d is not None), default=None)

    def truncated(self, n: int) -> "TDer":
        return TDer(self.ctx.with_degree(n), [P.truncate(a, n) for a in self._slots])

    def __repr__(self):
        return f"TDer({', '.join(repr(s) for s in self.slots)})"


def _same(a, b):
    if a.ctx != b.ctx:
        raise ContextMismatch(f"{a.ctx} != {b.ctx}")


def tder_normalize(slots: Sequence[LieElem]) -> TDer:
    if not slots:
        raise ValueError("need at least one slot")
    return TDer(slots[0].ctx, slots)


def tder_bracket(u: TDer, v: TDer) -> TDer:
    """([u,v])_k = [a_k, b_k] + u(b_k) - v(a_k); this is the operator commutator."""
    _same(u, v)
    n = u.ctx.max_degree
    iu, iv = u.images(n), v.images(n)
    out = []
    for a, b in zip(u._slots, v._slots):
        s = P.commutator(a, b, n)
        s = P.add(s, P.derive(b, iu, n))
        s = P.add(s, P.neg(P.derive(a, iv, n)))
        out.append(s)
    return TDer(u.ctx, out)


def _apply_poly(u: TDer, p: Poly, n: int) -> Poly:
    return P.derive(p, u.images(n), n)


def tder_apply(u: TDer, a):
    """Derivation action on a Lie, associative or cyclic element."""
    _same(u, a)
    n = a.ctx.max_degree
    out = _apply_poly(u, a._p, n)
    if isinstance(a, LieElem):
        return lie_elem(a.ctx, out)
    if isinstance(a, CycElem):
        return CycElem(a.ctx, out)
    return AssElem(a.ctx, out)


def is_special(u: TDer) -> tuple[bool, int | None]:
    """Whether u kills x_1 + ... + x_n; on failure also the first bad degree."""
    n = u.ctx.max_degree + 1
    s = {(l,): P.ONE for l in u.ctx.letters}
    img = _apply_poly(u, s, n)
    if not img:
        return True, None
    return False, P.min_degree(img)


def tder_compose_zero_right(u: TDer, i: int, n_gen: int, offset: bool = False) -> TDer:
    """u o_i 0 for the zero derivation of arity n_gen."""
    gctx = TruncationContext(n_gen, u.ctx.max_degree, offset)
    ctx, _, _ = _compose_maps(u.ctx, i, gctx)
    slots = []
    for l, a in zip(u.ctx.letters, u.slots):
        img = compose_zero_right(a, i, gctx)._p
        slots.extend([img] * (n_gen if l == i else 1))
    return TDer(ctx, slots)


def tder_compose_zero_left(fctx: TruncationContext, i: int, v: TDer) -> TDer:
    """0 o_i v for the zero derivation over fctx."""
    ctx, _, _ = _compose_maps(fctx, i, v.ctx)
    slots: list[Poly] = []
    for l in fctx.letters:
        if l == i:
            slots.extend(compose_zero_left(fctx, i, b)._p for b in v.slots)
        else:
            slots.append({})
    return TDer(ctx, slots)


def tder_compose(u: TDer, i: int, v: TDer) -> TDer:
    """Partial composition (a_1, .., a_i o_i b_1, .., a_i o_i b_n, .., a_m)."""
    a = tder_compose_zero_right(u, i, v.ctx.n_generators, v.ctx.offset)
    b = tder_compose_zero_left(u.ctx, i, v)
    return a + b


def tder_perm(sigma: Sequence[int], u: TDer) -> TDer:
    """u^sigma, slot k being (a_{sigma(k)})^sigma, so that (u(a))^sigma = u^sigma(a^sigma)."""
    letters = list(u.ctx.letters)
    if sorted(sigma) != letters:
        raise ValueError("permutation does not match the arity")
    st = u.ctx.start
    slots = u.slots
    return TDer(u.ctx, [perm_act(sigma, slots[sigma[k] - st]) for k in range(len(letters))])


def divergence(u: TDer) -> CycElem:
    """j(u) = tr(sum_i d_i(a_i) x_i) on the canonical representative."""
    acc: dict = {}
    for l, a in zip(u.ctx.letters, u._slots):
        for w, c in a.items():
            if w[-1] == l:
                acc[w] = acc.get(w, P.ZERO) + c
    return CycElem(u.ctx, P.clean(acc))


def cyc_apply(u: TDer, c: CycElem) -> CycElem:
    return tder_apply(u, c)


# ---------------------------------------------------------------- automorphisms


def _exp_action(u: TDer, p: Poly, n: int) -> Poly:
    """e^u applied to p, truncated at n."""
    imgs = u.images(n)
    out = dict(p)
    term = p
    k = 0
    while True:
        k += 1
        term = P.scale(P.derive(term, imgs, n), mpq(1, k))
        if not term:
            return out
        out = P.add(out, term)


def _lie_bch(u, v, bracket, n: int):
    memo: dict = {}

    def val(w):
        if w in memo:
            return memo[w]
        if len(w) == 1:
            r = u if w[0] == 1 else v
        else:
            a, b = standard_factorization(w)
            r = bracket(val(a), val(b))
        memo[w] = r
        return r

    acc = u + v
    for w, c in bch_coordinates(n):
        if len(w) > 1:
            acc = acc + val(w).scaled(c)
    return acc


def tder_bch(u: TDer, v: TDer) -> TDer:
    """log(e^u e^v) evaluated with the tangential bracket."""
    _same(u, v)
    return _lie_bch(u, v, tder_bracket, u.ctx.max_degree)


class TAut:
    """Tangential automorphism e^u, acting by x_i -> f_i^-1 x_i f_i."""

    __slots__ = ("log", "_conj")

    def __init__(self, log: TDer):
        self.log = log
        self._conj = None

    @property
    def ctx(self) -> TruncationContext:
        return self.log.ctx

    @property
    def arity(self) -> int:
        return self.ctx.n_generators

    @classmethod
    def identity(cls, ctx: TruncationContext) -> "TAut":
        return cls(TDer.zero(ctx))

    @classmethod
    def from_conjugators(cls, ctx: TruncationContext, conj: Sequence) -> "TAut":
        return cls(_log_from_conjugators(ctx, [c._p if isinstance(c, AssElem) else c for c in conj]))

    @property
    def conjugators(self) -> tuple[AssElem, ...]:
        if self._conj is None:
            self._conj = _conjugators(self.log)
        return tuple(AssElem(self.ctx, p) for p in self._conj)

    def __mul__(self, other: "TAut") -> "TAut":
        return taut_mul(self, other)

    def inverse(self) -> "TAut":
        return TAut(-self.log)

    def __eq__(self, other):
        return isinstance(other, TAut) and self.log == other.log

    def __hash__(self):
        return hash(self.log)

    def is_identity(self) -> bool:
        return self.log.is_zero()

    def __repr__(self):
        return f"TAut(log={self.log!r})"


def taut_exp(u: TDer) -> TAut:
    return TAut(u)


def taut_log(F: TAut) -> TDer:
    return F.log


def taut_mul(F: TAut, G: TAut) -> TAut:
    """(F.G)_i = f_i (rho(F) g_i); as actions rho(F.G) = rho(F) rho(G)."""
    return TAut(tder_bch(F.log, G.log))


def taut_apply(F: TAut, a):
    """rho(F) applied to a Lie, associative or cyclic element."""
    _same(F, a)
    out = _exp_action(F.log, a._p, a.ctx.max_degree)
    if isinstance(a, LieElem):
        return lie_elem(a.ctx, out)
    if isinstance(a, CycElem):
        return CycElem(a.ctx, out)
    return AssElem(a.ctx, out)


def _conjugators(u: TDer) -> tuple[Poly, ...]:
    """Group-like f_i with f_i^-1 x_i f_i = e^u(x_i) and no linear x_i in log f_i."""
    N = u.ctx.max_degree
    out = []
    for l in u.ctx.letters:
        x = {(l,): P.ONE}
        target = _exp_action(u, x, N + 1)
        phi: Poly = {}
        for d in range(1, N + 1):
            g = P.exp(phi, d + 1)
            cur = P.mul(P.mul(P.exp(P.neg(phi), d + 1), x, d + 1), g, d + 1)
            r = P.degree_part(P.add(target, P.neg(cur)), d + 1)
            if r:
                step = P.ad_inverse(r, l)
                if P.commutator(x, step, d + 1) != r:
                    raise NotLieError(d)
                phi = P.add(phi, step)
        out.append(P.exp(phi, N))
    return tuple(out)


def _log_from_conjugators(ctx: TruncationContext, conj: Sequence[Poly]) -> TDer:
    """Recover the tangential logarithm from a conjugator tuple, degree by degree."""
    N = ctx.max_degree
    targets = []
    for l, f in zip(ctx.letters, conj):
        f = P.truncate(P.clean(f), N)
        if f.get((), P.ZERO) != P.ONE:
            raise ValueError("conjugators need constant term 1")
        x = {(l,): P.ONE}
        targets.append(P.mul(P.mul(P.inverse(f, N + 1), x, N + 1), f, N + 1))
    slots: list[Poly] = [{} for _ in ctx.letters]
    for d in range(1, N + 1):
        u = TDer(ctx.with_degree(N), slots, normalize=False)
        new = []
        for k, l in enumerate(ctx.letters):
            cur = _exp_action(u, {(l,): P.ONE}, d + 1)
            r = P.degree_part(P.add(targets[k], P.neg(cur)), d + 1)
            step = P.ad_inverse(r, l) if r else {}
            if P.commutator({(l,): P.ONE}, step, d + 1) != r:
                raise NotLieError(d)
            new.append(P.add(slots[k], step))
        slots = new
    return TDer(ctx, slots)


def taut_compose(F: TAut, i: int, G: TAut) -> TAut:
    """F o_i G = (F o_i 1)(1 o_i G)."""
    a = tder_compose_zero_right(F.log, i, G.ctx.n_generators, G.ctx.offset)
    b = tder_compose_zero_left(F.ctx, i, G.log)
    return TAut(tder_bch(a, b))


def taut_compose_one(F: TAut, i: int, n_gen: int, offset: bool = False) -> TAut:
    """F o_i 1 for the identity of arity n_gen (the cosimplicial extension)."""
    return TAut(tder_compose_zero_right(F.log, i, n_gen, offset))


def taut_one_compose(fctx: TruncationContext, i: int, G: TAut) -> TAut:
    """1 o_i G."""
    return TAut(tder_compose_zero_left(fctx, i, G.log))


def taut_perm(sigma: Sequence[int], F: TAut) -> TAut:
    return TAut(tder_perm(sigma, F.log))


def jacobian(F: TAut) -> CycElem:
    """J(e^u) = sum_k (u.)^k j(u) / (k+1)!."""
    u = F.log
    n = u.ctx.max_degree
    imgs = u.images(n)
    term = divergence(u)._p
    acc = dict(term)
    k = 0
    while term:
        k += 1
        term = P.trace(P.derive(term, imgs, n))
        acc = P.add(acc, P.scale(term, mpq(1, factorial(k + 1))))
    return CycElem(u.ctx, acc)


def taut_is_special(F: TAut) -> tuple[bool, int | None]:
    return is_special(F.log)


# ---------------------------------------------------------------- cosimplicial complex


def _zero_ctx(ctx: TruncationContext, n_gen: int) -> TruncationContext:
    return TruncationContext(n_gen, ctx.max_degree, False)


def coface(x, k: int):
    """The k-th coface map d_k: arity n -> n+1 on lie, cyc or tder elements."""
    n = x.ctx.n_generators
    if x.ctx.offset:
        raise ValueError("coface maps are defined on unshifted elements")
    two = _zero_ctx(x.ctx, 2)
    if k == 0:
        return _zero_left(two, 2, x)
    if k == n + 1:
        return _zero_left(two, 1, x)
    if 1 <= k <= n:
        return _zero_right(x, k, 2)
    raise ValueError("coface index out of range")


def _zero_left(fctx, i, x):
    if isinstance(x, TDer):
        return tder_compose_zero_left(fctx, i, x)
    return compose_zero_left(fctx, i, x)


def _zero_right(x, i, n_gen):
    if isinstance(x, TDer):
        return tder_compose_zero_right(x, i, n_gen)
    return compose_zero_right(x, i, _zero_ctx(x.ctx, n_gen))


def cosimplicial_d(x):
    """d(x) = sum_k (-1)^k d_k(x)."""
    n = x.ctx.n_generators
    acc = coface(x, 0)
    for k in range(1, n + 2):
        t = coface(x, k)
        acc = acc - t if k % 2 else acc + t
    return acc


def taut_d(F: TAut) -> TAut:
    """Group-level differential (F o_2 F)(F o_1 F)^-1 for F of arity 2."""
    if F.arity != 2:
        raise ValueError("group-level differential is defined for arity 2")
    return taut_mul(taut_compose(F, 2, F), taut_compose(F, 1, F).inverse())
