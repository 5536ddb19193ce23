"""Truncated free Lie, free associative and cyclic-word algebras over Q.

Lie elements are stored through their associative expansion and expose
coordinates in the Lyndon basis (standard bracketing) on demand.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence, TypeVar

from gmpy2 import mpq

from . import _poly as P
from ._poly import Poly, Word


class ContextMismatch(ValueError):
    pass


class NotLieError(ValueError):
    def __init__(self, degree: int):
        super().__init__(f"element is not Lie in degree {degree}")
        self.degree = degree


class TruncationError(ValueError):
    pass


def scalar(x) -> mpq:
    """Coerce ints, fractions, strings like '3/4' and mpq to an exact rational."""
    if isinstance(x, mpq):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, (int, str)):
        return mpq(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def fmt_scalar(c: mpq) -> str:
    c = mpq(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class TruncationContext:
    n_generators: int
    max_degree: int
    offset: bool = False

    def __post_init__(self):
        if self.n_generators < 1:
            raise ValueError("n_generators must be positive")
        if self.max_degree < 1:
            raise ValueError("max_degree must be at least 1")

    @property
    def start(self) -> int:
        return 0 if self.offset else 1

    @property
    def letters(self) -> range:
        return range(self.start, self.start + self.n_generators)

    def with_degree(self, n: int) -> "TruncationContext":
        return TruncationContext(self.n_generators, n, self.offset)


def _check(a, b):
    if a.ctx != b.ctx:
        raise ContextMismatch(f"{a.ctx} != {b.ctx}")


# ---------------------------------------------------------------- Lyndon words


def lyndon_words(letters: Sequence[int], n: int) -> list[Word]:
    """All Lyndon words of length <= n, ordered by length then lexicographically."""
    letters = sorted(letters)
    k = len(letters)
    out: list[Word] = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        out.append(tuple(letters[i] for i in w))
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
    out.sort(key=lambda u: (len(u), u))
    return out


def is_lyndon(w: Word) -> bool:
    return bool(w) and all(w < w[i:] + w[:i] for i in range(1, len(w)))


@lru_cache(maxsize=None)
def standard_factorization(w: Word) -> tuple[Word, Word]:
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return w[:i], w[i:]
    raise ValueError(f"{w} has no standard factorization")


@lru_cache(maxsize=None)
def _lyndon_expansion(w: Word) -> tuple[tuple[Word, mpq], ...]:
    if len(w) == 1:
        return ((w, P.ONE),)
    u, v = standard_factorization(w)
    pu, pv = dict(_lyndon_expansion(u)), dict(_lyndon_expansion(v))
    return tuple(sorted(P.commutator(pu, pv, len(w)).items()))


def lyndon_expansion(w: Word) -> Poly:
    return dict(_lyndon_expansion(w))


def bracketing_string(w: Word) -> str:
    if len(w) == 1:
        return f"x{w[0]}"
    u, v = standard_factorization(w)
    return f"[{bracketing_string(u)},{bracketing_string(v)}]"


def lyndon_coordinates(p: Poly) -> dict[Word, mpq]:
    """Coordinates of a Lie polynomial in the Lyndon basis.

    The expansion of the bracketed Lyndon word w is w plus lexicographically
    larger words, so peeling off the smallest word recovers the coordinates.
    """
    rem = dict(p)
    heap = list(rem)
    heapq.heapify(heap)
    coords: dict[Word, mpq] = {}
    while heap:
        w = heapq.heappop(heap)
        c = rem.get(w)
        if not c:
            continue
        if not is_lyndon(w):
            raise NotLieError(len(w))
        coords[w] = c
        for u, cu in _lyndon_expansion(w):
            v = rem.get(u, P.ZERO) - c * cu
            if v:
                if u not in rem:
                    heapq.heappush(heap, u)
                rem[u] = v
            else:
                rem.pop(u, None)
    return coords


def lyndon_basis(ctx: TruncationContext) -> dict[int, list[tuple[Word, str]]]:
    """Lyndon words per degree with their standard bracketing."""
    out: dict[int, list[tuple[Word, str]]] = {d: [] for d in range(1, ctx.max_degree + 1)}
    for w in lyndon_words(list(ctx.letters), ctx.max_degree):
        out[len(w)].append((w, bracketing_string(w)))
    return out


# ---------------------------------------------------------------- elements


class _Graded:
    __slots__ = ("ctx", "_p")
    kind = "?"

    def __init__(self, ctx: TruncationContext, poly: Mapping[Word, mpq] | None = None):
        self.ctx = ctx
        self._p: Poly = P.truncate(P.clean(poly or {}), ctx.max_degree)

    def _new(self, poly: Poly):
        obj = object.__new__(type(self))
        obj.ctx = self.ctx
        obj._p = poly
        return obj

    @property
    def poly(self) -> Poly:
        return dict(self._p)

    def __add__(self, other):
        _check(self, other)
        return self._new(P.add(self._p, other._p))

    def __sub__(self, other):
        _check(self, other)
        return self._new(P.add(self._p, P.neg(other._p)))

    def __neg__(self):
        return self._new(P.neg(self._p))

    def __rmul__(self, s):
        return self._new(P.scale(self._p, scalar(s)))

    def scaled(self, s):
        return self._new(P.scale(self._p, scalar(s)))

    def __eq__(self, other):
        return type(self) is type(other) and self.ctx == other.ctx and self._p == other._p

    def __hash__(self):
        return hash((type(self).__name__, self.ctx, frozenset(self._p.items())))

    def is_zero(self) -> bool:
        return not self._p

    def min_degree(self) -> int | None:
        return P.min_degree(self._p)

    def degree_part(self, d: int):
        return self._new(P.degree_part(self._p, d))

    def truncated(self, n: int):
        obj = object.__new__(type(self))
        obj.ctx = self.ctx.with_degree(n)
        obj._p = P.truncate(self._p, n)
        return obj

    def terms(self) -> dict[Word, mpq]:
        return dict(self._p)

    def __repr__(self):
        items = sorted(self.terms().items(), key=lambda t: (len(t[0]), t[0]))
        body = " + ".join(f"{fmt_scalar(c)}*{'.'.join(map(str, w)) or '1'}" for w, c in items)
        return f"{type(self).__name__}({body or '0'})"


class AssElem(_Graded):
    """Truncated element of the free associative algebra."""

    kind = "ass"

    @classmethod
    def one(cls, ctx: TruncationContext) -> "AssElem":
        return cls(ctx, {(): P.ONE})

    @classmethod
    def generator(cls, ctx: TruncationContext, i: int) -> "AssElem":
        if i not in ctx.letters:
            raise ValueError(f"letter {i} not in context")
        return cls(ctx, {(i,): P.ONE})

    @property
    def constant(self) -> mpq:
        return self._p.get((), P.ZERO)

    def __mul__(self, other):
        if isinstance(other, AssElem):
            _check(self, other)
            return self._new(P.mul(self._p, other._p, self.ctx.max_degree))
        return self.scaled(other)

    def inverse(self) -> "AssElem":
        return self._new(P.inverse(self._p, self.ctx.max_degree))


class LieElem(_Graded):
    """Truncated element of the free Lie algebra (Lyndon basis coordinates)."""

    kind = "lie"
    __slots__ = ("_coords",)

    def __init__(self, ctx, poly=None, check: bool = True):
        super().__init__(ctx, poly)
        if () in self._p:
            raise ValueError("Lie elements have no constant term")
        self._coords = None
        if check:
            self.terms()

    def _new(self, poly):
        obj = super()._new(poly)
        obj._coords = None
        return obj

    def truncated(self, n):
        obj = super().truncated(n)
        obj._coords = None
        return obj

    @classmethod
    def zero(cls, ctx) -> "LieElem":
        return cls(ctx, {}, check=False)

    @classmethod
    def generator(cls, ctx: TruncationContext, i: int) -> "LieElem":
        if i not in ctx.letters:
            raise ValueError(f"letter {i} not in context")
        return cls(ctx, {(i,): P.ONE}, check=False)

    @classmethod
    def from_lyndon(cls, ctx: TruncationContext, coords: Mapping[Word, object]) -> "LieElem":
        acc: dict = {}
        for w, c in coords.items():
            w = tuple(w)
            if not is_lyndon(w) or any(l not in ctx.letters for l in w):
                raise ValueError(f"{w} is not a Lyndon word over the context letters")
            if len(w) <= ctx.max_degree:
                P.add_into(acc, lyndon_expansion(w), scalar(c))
        return cls(ctx, P.clean(acc), check=False)

    @classmethod
    def from_poly(cls, ctx, poly: Poly) -> "LieElem":
        return cls(ctx, poly, check=True)

    def terms(self) -> dict[Word, mpq]:
        if self._coords is None:
            self._coords = lyndon_coordinates(self._p)
        return dict(self._coords)

    def as_ass(self) -> AssElem:
        return AssElem(self.ctx, self._p)

    def __mul__(self, s):
        return self.scaled(s)


class CycElem(_Graded):
    """Truncated cyclic word (keys are minimal rotations)."""

    kind = "cyc"

    def __init__(self, ctx, poly=None):
        super().__init__(ctx, P.trace(poly or {}))

    def __mul__(self, s):
        return self.scaled(s)


def lie_elem(ctx: TruncationContext, poly: Poly) -> LieElem:
    """Wrap a polynomial known to be Lie (no basis check)."""
    return LieElem(ctx, poly, check=False)


# ---------------------------------------------------------------- operations


def bracket(a: LieElem, b: LieElem) -> LieElem:
    _check(a, b)
    return lie_elem(a.ctx, P.commutator(a._p, b._p, a.ctx.max_degree))


def exp_grouplike(a: LieElem) -> AssElem:
    return AssElem(a.ctx, P.exp(a._p, a.ctx.max_degree))


def log_primitive(g: AssElem) -> LieElem:
    """Inverse of exp_grouplike; raises NotLieError at the first bad degree."""
    if g.constant != 1:
        raise NotLieError(0)
    lp = P.log(g._p, g.ctx.max_degree)
    for d in range(1, g.ctx.max_degree + 1):
        if P.dynkin_defect(lp, d):
            raise NotLieError(d)
    return lie_elem(g.ctx, lp)


def is_grouplike(g: AssElem) -> bool:
    try:
        log_primitive(g)
    except NotLieError:
        return False
    return True


@lru_cache(maxsize=None)
def _bch_lyndon(n: int) -> tuple[tuple[Word, mpq], ...]:
    p = P.log(P.mul(P.exp({(1,): P.ONE}, n), P.exp({(2,): P.ONE}, n), n), n)
    return tuple(sorted(lyndon_coordinates(p).items(), key=lambda t: (len(t[0]), t[0])))


def bch_coordinates(n: int) -> list[tuple[Word, mpq]]:
    """The BCH series log(e^{x1}e^{x2}) through degree n in Lyndon coordinates."""
    return list(_bch_lyndon(n))


def bch(a: LieElem, b: LieElem) -> LieElem:
    _check(a, b)
    n = a.ctx.max_degree
    return lie_elem(a.ctx, P.log(P.mul(P.exp(a._p, n), P.exp(b._p, n), n), n))


def bch_many(elems: Sequence[LieElem]) -> LieElem:
    if not elems:
        raise ValueError("need at least one element")
    for e in elems[1:]:
        _check(elems[0], e)
    n = elems[0].ctx.max_degree
    g: Poly = {(): P.ONE}
    for e in elems:
        g = P.mul(g, P.exp(e._p, n), n)
    return lie_elem(elems[0].ctx, P.log(g, n))


T = TypeVar("T")


def lie_eval(f: LieElem, images: Mapping[int, T], bracket_fn: Callable[[T, T], T], zero: T) -> T:
    """Evaluate a Lie series at elements of any Lie algebra.

    ``images`` maps each letter of f's context to an element supporting +,
    and scalar multiplication via ``scaled``.  Brackets of nested Lyndon
    words are memoised along standard factorizations.
    """
    memo: dict[Word, T] = {}

    def val(w: Word) -> T:
        if w in memo:
            return memo[w]
        if len(w) == 1:
            r = images[w[0]]
        else:
            u, v = standard_factorization(w)
            r = bracket_fn(val(u), val(v))
        memo[w] = r
        return r

    acc = zero
    for w, c in sorted(f.terms().items(), key=lambda t: (len(t[0]), t[0])):
        acc = acc + val(w).scaled(c)
    return acc


def substitute(f, images: Sequence, target: TruncationContext | None = None):
    """Apply the homomorphism sending the i-th letter of f to images[i].

    Works for LieElem (Lie images) and AssElem (associative images).  The
    result lives in the images' context.  Images of degree zero are rejected
    because the truncated result would be under-resolved.
    """
    letters = list(f.ctx.letters)
    if len(images) != len(letters):
        raise ValueError("need one image per letter")
    if target is None:
        if not images:
            raise ValueError("cannot infer target context")
        target = images[0].ctx
    for im in images:
        if im.ctx != target:
            raise ContextMismatch("images must share a context")
        if im._p.get((), P.ZERO):
            raise TruncationError("images must have no constant term")
    n = target.max_degree
    imgs = {l: im._p for l, im in zip(letters, images)}
    # the source letters and the target letters may overlap; substitute
    # through fresh private labels to avoid accidental capture
    fresh = {l: -1 - k for k, l in enumerate(letters)}
    src = P.relabel(f._p, fresh)
    out = P.substitute(src, {fresh[l]: imgs[l] for l in letters}, n)
    if isinstance(f, LieElem):
        return lie_elem(target, out)
    if isinstance(f, CycElem):
        return CycElem(target, out)
    return AssElem(target, out)


def _compose_maps(fctx: TruncationContext, i: int, gctx: TruncationContext):
    if i not in fctx.letters:
        raise ValueError(f"slot {i} out of range")
    if fctx.max_degree != gctx.max_degree:
        raise ContextMismatch("compositions need equal truncation degree")
    if i == 0 and not gctx.offset:
        raise ValueError("slot 0 composition needs a shifted second argument")
    n = gctx.n_generators
    ctx = TruncationContext(fctx.n_generators + n - 1, fctx.max_degree, fctx.offset)
    fmap: dict[int, dict[int, mpq]] = {}
    for j in fctx.letters:
        if j < i:
            fmap[j] = {j: P.ONE}
        elif j == i:
            fmap[j] = {i + k: P.ONE for k in range(n)}
        else:
            fmap[j] = {j + n - 1: P.ONE}
    gmap = {gctx.start + k: i + k for k in range(n)}
    return ctx, fmap, gmap


def compose_zero_right(f, i: int, gctx: TruncationContext):
    """f o_i 0 for a zero element of context gctx."""
    ctx, fmap, _ = _compose_maps(f.ctx, i, gctx)
    fresh = {j: -1 - k for k, j in enumerate(f.ctx.letters)}
    src = P.relabel(f._p, fresh)
    out = P.linear_substitute(src, {fresh[j]: m for j, m in fmap.items()})
    return _rewrap(f, ctx, out)


def compose_zero_left(fctx: TruncationContext, i: int, g):
    """0 o_i g for a zero element of context fctx."""
    ctx, _, gmap = _compose_maps(fctx, i, g.ctx)
    fresh = {j: -1 - k for k, j in enumerate(g.ctx.letters)}
    src = P.relabel(g._p, fresh)
    out = P.relabel(src, {fresh[j]: m for j, m in gmap.items()})
    return _rewrap(g, ctx, out)


def _rewrap(proto, ctx, poly):
    if isinstance(proto, LieElem):
        return lie_elem(ctx, poly)
    if isinstance(proto, CycElem):
        return CycElem(ctx, poly)
    return AssElem(ctx, poly)


def compose_graded(f, i: int, g):
    """Partial composition f o_i g = f(.., x_i+..+x_{i+n-1}, ..) + g(x_i, ..)."""
    if type(f) is not type(g):
        raise TypeError("compositions need the same algebra family")
    a = compose_zero_right(f, i, g.ctx)
    b = compose_zero_left(f.ctx, i, g)
    return a + b


def perm_act(sigma: Sequence[int], f):
    """Right action f^sigma(x) = f(x_{sigma^-1(1)}, ..., x_{sigma^-1(n)}).

    ``sigma`` is given in one-line notation over the context letters:
    sigma[k] is the image of the k-th letter.
    """
    letters = list(f.ctx.letters)
    if sorted(sigma) != letters:
        raise ValueError("permutation does not match the arity")
    inv = {s: l for l, s in zip(letters, sigma)}
    out = P.relabel(f._p, inv)
    return _rewrap(f, f.ctx, out)


def perm_compose(sigma: Sequence[int], tau: Sequence[int], start: int = 1) -> tuple[int, ...]:
    """(sigma tau)(k) = sigma(tau(k)) in one-line notation."""
    return tuple(sigma[t - start] for t in tau)


def perm_inverse(sigma: Sequence[int], start: int = 1) -> tuple[int, ...]:
    inv = [0] * len(sigma)
    for k, s in enumerate(sigma):
        inv[s - start] = k + start
    return tuple(inv)


def partial_derivative(a: AssElem, i: int) -> AssElem:
    if i not in a.ctx.letters:
        raise ValueError(f"letter {i} not in context")
    return AssElem(a.ctx, P.strip_last(a._p, i))


def trace(a) -> CycElem:
    return CycElem(a.ctx, a._p)


def cyc_act(u_images: Mapping[int, Poly], c: CycElem) -> CycElem:
    n = c.ctx.max_degree
    return CycElem(c.ctx, P.derive(c._p, u_images, n))


# ---------------------------------------------------------------- permutations and trees


def perm_insert(sigma: Sequence[int], i: int, tau: Sequence[int]) -> tuple[int, ...]:
    """Block insertion of tau into slot i of sigma (one-line notation).

    For i >= 1 both permutations are over {1..m} (or sigma over {0..m} fixing
    0); for i == 0 both must fix 0 and tau's block goes first.
    """
    sigma, tau = tuple(sigma), tuple(tau)
    if i == 0:
        if not sigma or sigma[0] != 0 or not tau or tau[0] != 0:
            raise ValueError("slot 0 insertion needs 0-fixing permutations")
        n = len(tau) - 1
        return (0,) + tau[1:] + tuple(s + n for s in sigma[1:])
    frozen = bool(sigma) and sigma[0] == 0
    start = 0 if frozen else 1
    labels = sorted(sigma)
    if labels != list(range(start, start + len(sigma))) or i not in sigma or (frozen and i == 0):
        raise ValueError("invalid slot")
    n = len(tau)
    if sorted(tau) != list(range(1, n + 1)):
        raise ValueError("tau must be a permutation of 1..n")
    p = sigma.index(i) + start
    out = []
    for k in range(start, start + len(sigma) + n - 1):
        if k < p:
            s = sigma[k - start]
            out.append(s if s < i else s + n - 1)
        elif k <= p + n - 1:
            out.append(tau[k - p] + i - 1)
        else:
            s = sigma[k - n + 1 - start]
            out.append(s if s < i else s + n - 1)
    return tuple(out)


Tree = object  # int leaf or (Tree, Tree)


@dataclass(frozen=True)
class ParenPerm:
    """Parenthesized permutation: a full binary tree with labelled leaves."""

    tree: Tree
    frozen: bool = False

    def __post_init__(self):
        leaves = self.leaves()
        start = 0 if self.frozen else 1
        if sorted(leaves) != list(range(start, start + len(leaves))):
            raise ValueError("leaf labels must form a bijection")
        if self.frozen and leaves[0] != 0:
            raise ValueError("the frozen label 0 must be leftmost")

    def leaves(self) -> tuple[int, ...]:
        out: list[int] = []

        def walk(t):
            if isinstance(t, tuple):
                walk(t[0])
                walk(t[1])
            else:
                out.append(t)

        walk(self.tree)
        return tuple(out)

    @property
    def arity(self) -> int:
        return len(self.leaves()) - (1 if self.frozen else 0)

    def permutation(self) -> tuple[int, ...]:
        return self.leaves()

    def __str__(self):
        def show(t, top):
            if isinstance(t, tuple):
                inner = show(t[0], False) + show(t[1], False)
                return f"({inner})"
            return str(t)

        return show(self.tree, True)

    @classmethod
    def parse(cls, text: str) -> "ParenPerm":
        """Parse words like '(1(32))', '0(1(23))' or '((01)2)'."""
        s = text.replace(" ", "")
        pos = 0

        def item():
            nonlocal pos
            if pos >= len(s):
                raise ValueError(f"unexpected end of {text!r}")
            ch = s[pos]
            if ch.isdigit():
                pos += 1
                return int(ch)
            if ch == "(":
                pos += 1
                parts = []
                while pos < len(s) and s[pos] != ")":
                    parts.append(item())
                if pos >= len(s):
                    raise ValueError(f"unbalanced parentheses in {text!r}")
                pos += 1
                return _pair(parts)
            raise ValueError(f"unexpected character {ch!r} in {text!r}")

        def _pair(parts):
            if len(parts) == 1:
                return parts[0]
            if len(parts) == 2:
                return (parts[0], parts[1])
            raise ValueError(f"not fully parenthesized: {text!r}")

        parts = []
        while pos < len(s):
            parts.append(item())
        if not parts:
            raise ValueError("empty word")
        tree = _pair(parts)
        leaves = []

        def walk(t):
            if isinstance(t, tuple):
                walk(t[0])
                walk(t[1])
            else:
                leaves.append(t)

        walk(tree)
        return cls(tree, frozen=(leaves[0] == 0))


def tree_insert(w: ParenPerm, i: int, w2: ParenPerm) -> ParenPerm:
    """Graft w2 in place of leaf i of w, relabelling as perm_insert does."""
    if i == 0:
        if not (w.frozen and w2.frozen):
            raise ValueError("slot 0 needs two frozen trees")
        n = w2.arity

        def shift(t):
            if isinstance(t, tuple):
                return (shift(t[0]), shift(t[1]))
            return t + n if t != 0 else t

        def graft(t):
            if isinstance(t, tuple):
                return (graft(t[0]), graft(t[1]))
            return w2.tree if t == 0 else t

        return ParenPerm(graft(shift(w.tree)), frozen=True)
    if w2.frozen:
        raise ValueError("cannot insert a frozen tree at a positive slot")
    if i not in w.leaves() or (w.frozen and i == 0):
        raise ValueError("invalid slot")
    n = w2.arity

    def inner(t):
        if isinstance(t, tuple):
            return (inner(t[0]), inner(t[1]))
        return t + i - 1

    def outer(t):
        if isinstance(t, tuple):
            return (outer(t[0]), outer(t[1]))
        if t == i:
            return inner(w2.tree)
        return t if t < i else t + n - 1

    return ParenPerm(outer(w.tree), frozen=w.frozen)
