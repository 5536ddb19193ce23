"""Sparse truncated noncommutative polynomials.

A polynomial is a plain ``dict`` mapping words (tuples of letter labels) to
nonzero ``mpq`` coefficients.  Every function here is pure: inputs are never
mutated and fresh dicts are returned.  ``n`` is always the truncation degree;
words longer than ``n`` are dropped.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable, Iterable, Mapping

from gmpy2 import mpq

Word = tuple[int, ...]
Poly = dict[Word, mpq]

ZERO = mpq(0)
ONE = mpq(1)


def clean(p: Mapping[Word, mpq]) -> Poly:
    return {w: c for w, c in p.items() if c}


def add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for w, c in b.items():
        v = out.get(w, ZERO) + c
        if v:
            out[w] = v
        else:
            out.pop(w, None)
    return out


def add_into(acc: dict, b: Mapping[Word, mpq], scale: mpq = ONE) -> None:
    for w, c in b.items():
        acc[w] = acc.get(w, ZERO) + c * scale


def lincomb(pairs: Iterable[tuple[mpq, Poly]]) -> Poly:
    acc: dict = {}
    for s, p in pairs:
        if s:
            add_into(acc, p, s)
    return clean(acc)


def scale(a: Poly, s) -> Poly:
    s = mpq(s)
    if not s:
        return {}
    return {w: c * s for w, c in a.items()}


def neg(a: Poly) -> Poly:
    return {w: -c for w, c in a.items()}


def truncate(a: Poly, n: int) -> Poly:
    return {w: c for w, c in a.items() if len(w) <= n}


def degree_part(a: Poly, d: int) -> Poly:
    return {w: c for w, c in a.items() if len(w) == d}


def min_degree(a: Poly) -> int | None:
    return min((len(w) for w in a), default=None)


def by_degree(a: Poly) -> dict[int, list[tuple[Word, mpq]]]:
    out: dict[int, list] = defaultdict(list)
    for w, c in a.items():
        out[len(w)].append((w, c))
    return out


def mul(a: Poly, b: Poly, n: int) -> Poly:
    if not a or not b:
        return {}
    bd = by_degree(b)
    bdegs = sorted(bd)
    acc: dict = {}
    get = acc.get
    for wa, ca in a.items():
        room = n - len(wa)
        for d in bdegs:
            if d > room:
                break
            for wb, cb in bd[d]:
                w = wa + wb
                acc[w] = get(w, ZERO) + ca * cb
    return clean(acc)


def commutator(a: Poly, b: Poly, n: int) -> Poly:
    return add(mul(a, b, n), neg(mul(b, a, n)))


def power_series(a: Poly, coeffs: Callable[[int], mpq], n: int) -> Poly:
    """Sum of coeffs(k) * a^k for k >= 0; ``a`` must have no constant term."""
    out: Poly = {(): coeffs(0)} if coeffs(0) else {}
    term: Poly = {(): ONE}
    k = 0
    while True:
        k += 1
        term = mul(term, a, n)
        if not term:
            break
        c = coeffs(k)
        if c:
            out = add(out, scale(term, c))
    return out


def _exp_coeff(k: int) -> mpq:
    f = 1
    for i in range(2, k + 1):
        f *= i
    return mpq(1, f)


def _log_coeff(k: int) -> mpq:
    if k == 0:
        return ZERO
    return mpq((-1) ** (k + 1), k)


def exp(a: Poly, n: int) -> Poly:
    return power_series(a, _exp_coeff, n)


def log(g: Poly, n: int) -> Poly:
    """log of a series with constant term 1."""
    if g.get((), ZERO) != ONE:
        raise ValueError("log requires constant term 1")
    x = {w: c for w, c in g.items() if w}
    return power_series(x, _log_coeff, n)


def inverse(g: Poly, n: int) -> Poly:
    """Multiplicative inverse of a series with constant term 1."""
    if g.get((), ZERO) != ONE:
        raise ValueError("inverse requires constant term 1")
    x = {w: -c for w, c in g.items() if w}
    return power_series(x, lambda k: ONE, n)


def substitute(a: Poly, images: Mapping[int, Poly], n: int) -> Poly:
    """Algebra homomorphism x_l -> images[l] applied to ``a``.

    Letters absent from ``images`` are left unchanged.  Images must have no
    constant term so that truncation is exact.
    """
    if not a:
        return {}
    memo: dict[Word, Poly] = {(): {(): ONE}}

    def img(letter: int) -> Poly:
        return images[letter] if letter in images else {(letter,): ONE}

    acc: dict = {}
    for w in sorted(a):
        if w not in memo:
            # walk back to the longest memoised prefix
            k = len(w)
            while w[:k] not in memo:
                k -= 1
            cur = memo[w[:k]]
            for j in range(k, len(w)):
                cur = mul(cur, img(w[j]), n) if cur else {}
                memo[w[: j + 1]] = cur
        add_into(acc, memo[w], a[w])
    return clean(acc)


def relabel(a: Poly, mapping: Mapping[int, int]) -> Poly:
    """Rename letters (injective on the letters that occur)."""
    out: dict = {}
    for w, c in a.items():
        nw = tuple(mapping.get(l, l) for l in w)
        out[nw] = out.get(nw, ZERO) + c
    return clean(out)


def linear_substitute(a: Poly, images: Mapping[int, Mapping[int, mpq]]) -> Poly:
    """Substitute each letter by a linear combination of letters."""
    acc: dict = {}
    for w, c in a.items():
        partial = [((), c)]
        for l in w:
            opts = images.get(l)
            if opts is None:
                partial = [(pw + (l,), pc) for pw, pc in partial]
            else:
                partial = [(pw + (m,), pc * s) for pw, pc in partial for m, s in opts.items()]
        for pw, pc in partial:
            acc[pw] = acc.get(pw, ZERO) + pc
    return clean(acc)


def derive(a: Poly, images: Mapping[int, Poly], n: int) -> Poly:
    """Derivation x_l -> images[l] (Leibniz rule) applied to ``a``."""
    acc: dict = {}
    get = acc.get
    img_by_len = {l: sorted(p.items(), key=lambda t: len(t[0])) for l, p in images.items() if p}
    for w, c in a.items():
        lw = len(w)
        for pos, l in enumerate(w):
            terms = img_by_len.get(l)
            if not terms:
                continue
            head, tail = w[:pos], w[pos + 1 :]
            room = n - lw + 1
            for wi, ci in terms:
                if len(wi) > room:
                    break
                nw = head + wi + tail
                acc[nw] = get(nw, ZERO) + c * ci
    return clean(acc)


def strip_last(a: Poly, letter: int) -> Poly:
    return {w[:-1]: c for w, c in a.items() if w and w[-1] == letter}


def strip_first(a: Poly, letter: int) -> Poly:
    return {w[1:]: c for w, c in a.items() if w and w[0] == letter}


def ad_inverse(b: Poly, letter: int) -> Poly:
    """Solve [x_letter, a] = b for a, up to polynomials in x_letter.

    Uses a = sum_k L^k(c) x^k with c = L(b), L stripping a leading x.
    Pure powers of ``letter`` are removed from the answer.
    """
    c = strip_first(b, letter)
    acc: dict = {}
    k = 0
    cur = c
    while cur:
        suffix = (letter,) * k
        for w, v in cur.items():
            nw = w + suffix
            acc[nw] = acc.get(nw, ZERO) + v
        cur = strip_first(cur, letter)
        k += 1
    return {w: v for w, v in acc.items() if v and any(l != letter for l in w)}


def canonical_rotation(w: Word) -> Word:
    if not w:
        return w
    return min(w[i:] + w[:i] for i in range(len(w)))


def trace(a: Poly) -> Poly:
    acc: dict = {}
    for w, c in a.items():
        r = canonical_rotation(w)
        acc[r] = acc.get(r, ZERO) + c
    return clean(acc)


def left_bracketing(w: Word) -> Poly:
    """Expansion of [...[[x_w1, x_w2], x_w3], ..., x_wd]."""
    cur: Poly = {w[:1]: ONE}
    for l in w[1:]:
        nxt: dict = {}
        for u, c in cur.items():
            nxt[u + (l,)] = nxt.get(u + (l,), ZERO) + c
            nxt[(l,) + u] = nxt.get((l,) + u, ZERO) - c
        cur = clean(nxt)
    return cur


def dynkin_defect(p: Poly, d: int) -> Poly:
    """p_d - (1/d) * left_bracketing(p_d); zero iff the degree-d part is Lie."""
    part = degree_part(p, d)
    acc: dict = {}
    inv = mpq(1, d)
    for w, c in part.items():
        add_into(acc, left_bracketing(w), c * inv)
    return add(part, neg(clean(acc)))
