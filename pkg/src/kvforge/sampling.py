"""Seeded random elements for property checks."""

from __future__ import annotations

import random

from gmpy2 import mpq

from . import _poly as P
from .derivations import TAut, TDer
from .lie import AssElem, CycElem, LieElem, TruncationContext, lyndon_words


def _coeff(rng: random.Random, height: int) -> mpq:
    num = rng.randint(-height, height)
    return mpq(num, rng.randint(1, height))


def random_lie(
    ctx: TruncationContext,
    rng: random.Random,
    terms: int = 3,
    min_degree: int = 1,
    height: int = 3,
    max_degree: int | None = None,
) -> LieElem:
    top = ctx.max_degree if max_degree is None else min(max_degree, ctx.max_degree)
    words = [w for w in lyndon_words(list(ctx.letters), top) if len(w) >= min_degree]
    coords = {w: _coeff(rng, height) for w in rng.sample(words, min(terms, len(words)))}
    return LieElem.from_lyndon(ctx, coords)


def random_ass(ctx: TruncationContext, rng: random.Random, terms: int = 4, height: int = 3) -> AssElem:
    poly: P.Poly = {}
    for _ in range(terms):
        w = tuple(rng.choice(list(ctx.letters)) for _ in range(rng.randint(0, ctx.max_degree)))
        poly[w] = poly.get(w, P.ZERO) + _coeff(rng, height)
    return AssElem(ctx, P.clean(poly))


def random_cyc(ctx: TruncationContext, rng: random.Random, terms: int = 4, height: int = 3) -> CycElem:
    return CycElem(ctx, P.trace(random_ass(ctx, rng, terms, height)._p))


def random_tder(
    ctx: TruncationContext,
    rng: random.Random,
    terms: int = 2,
    min_degree: int = 1,
    height: int = 3,
    max_degree: int | None = None,
) -> TDer:
    return TDer(ctx, [random_lie(ctx, rng, terms, min_degree, height, max_degree) for _ in ctx.letters])


def random_taut(ctx: TruncationContext, rng: random.Random, terms: int = 2, height: int = 3, max_degree: int | None = None) -> TAut:
    return TAut(random_tder(ctx, rng, terms, 1, height, max_degree))
