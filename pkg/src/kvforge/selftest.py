"""Deterministic property suite behind ``kvforge selftest``."""

from __future__ import annotations

import random

from .derivations import (
    cosimplicial_d,
    cyc_apply,
    divergence,
    is_special,
    jacobian,
    taut_apply,
    taut_compose,
    taut_mul,
    tder_bracket,
    tder_compose,
)
from .equations import extend_to_moperad, residual, solve_associator
from .kv import b_identities, build_F012, check_kv1, duflo_extract, kv_associator
from .lie import TruncationContext, bch, bracket, compose_graded
from .sampling import random_cyc, random_lie, random_taut, random_tder


def run_selftest(degree: int = 4, seed: int = 0, rounds: int = 5) -> list[tuple[str, bool]]:
    rng = random.Random(seed)
    N = max(degree, 3)
    c2 = TruncationContext(2, N, False)
    c3 = TruncationContext(3, N, False)
    out: list[tuple[str, bool]] = []

    def record(name, fn):
        out.append((name, all(fn() for _ in range(rounds))))

    def bch_assoc():
        a, b, c = (random_lie(c3, rng, max_degree=2) for _ in range(3))
        return bch(bch(a, b), c) == bch(a, bch(b, c))

    def jacobi():
        a, b, c = (random_lie(c3, rng, max_degree=2) for _ in range(3))
        return (bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))).is_zero()

    def tder_assoc():
        u, v, w = (random_tder(c2, rng, max_degree=2) for _ in range(3))
        return tder_compose(tder_compose(u, 1, v), 1, w) == tder_compose(u, 1, tder_compose(v, 1, w))

    def div_cocycle():
        u, v = random_tder(c2, rng, max_degree=2), random_tder(c2, rng, max_degree=2)
        return divergence(tder_bracket(u, v)) == cyc_apply(u, divergence(v)) - cyc_apply(v, divergence(u))

    def jac_cocycle():
        F, G = random_taut(c2, rng, max_degree=2), random_taut(c2, rng, max_degree=2)
        return jacobian(taut_mul(F, G)) == jacobian(F) + taut_apply(F, jacobian(G))

    def jac_operad():
        F, G = random_taut(c2, rng, max_degree=2), random_taut(c2, rng, max_degree=2)
        return jacobian(taut_compose(F, 2, G)) == compose_graded(jacobian(F), 2, jacobian(G))

    def d_squared():
        c = random_cyc(c2, rng)
        return cosimplicial_d(cosimplicial_d(c)).is_zero()

    record("bch-associative", bch_assoc)
    record("lie-jacobi", jacobi)
    record("tder-operad-associative", tder_assoc)
    record("divergence-cocycle", div_cocycle)
    record("jacobian-cocycle", jac_cocycle)
    record("jacobian-operad-morphism", jac_operad)
    record("cyc-d-squared", d_squared)
    for r in b_identities(N):
        out.append((r.equation, r.passed))
    a = solve_associator(N, 1)
    for eq in ("I", "H", "P"):
        out.append((eq, residual(eq, a).passed))
    m = extend_to_moperad(a, check=False)
    for eq in ("MP", "O"):
        out.append((eq, residual(eq, m).passed))
    F = build_F012(m)
    out.append(("kv1", check_kv1(F).passed))
    try:
        duflo_extract(F)
        out.append(("kv2", True))
    except ValueError:
        out.append(("kv2", False))
    out.append(("kv-associator-special", is_special(kv_associator(F).log)[0]))
    return out
