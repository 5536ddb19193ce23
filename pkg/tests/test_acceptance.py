"""The thirteen acceptance criteria, one test each, at their stated tolerances.

Each test is tagged with ``criterion(number, title)``; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import itertools
import json
import random
import time

import pytest
from gmpy2 import mpq

from kvforge import _poly as P
from kvforge.chord import (
    case_formula,
    dk_bracket,
    dk_compose,
    dk_zero,
    eta,
    eta_preimage,
    eval_t_group,
    eval_t_series,
    iota,
    iota_preimage,
    kappa,
    lambda_map,
    moperad_compose0,
    plus,
    t_gen,
)
from kvforge.cli import main
from kvforge.derivations import (
    TAut,
    TDer,
    cyc_apply,
    divergence,
    is_special,
    jacobian,
    taut_apply,
    taut_compose,
    taut_mul,
    tder_apply,
    tder_bracket,
    tder_compose,
    tder_perm,
)
from kvforge.equations import (
    GT1Element,
    extend_to_moperad,
    gt1_ratio,
    lie2,
    pentagon_taut_value,
    residual,
    solve_associator,
)
from kvforge.kv import (
    b_identities,
    build_F012,
    build_F0w,
    check_krv1,
    check_krv2,
    check_kv1,
    duflo_extract,
    f_identities,
    group_act,
    gt1_to_kv,
    kv_associator,
    pentagon_image_residual,
    tau,
)
from kvforge.lie import (
    AssElem,
    CycElem,
    LieElem,
    TruncationContext,
    bch,
    bracket,
    compose_graded,
    perm_act,
    perm_insert,
)
from kvforge.sampling import random_ass, random_cyc, random_lie, random_taut, random_tder
from kvforge.serialize import dumps, loads, to_json

from test_lie import as_fractions, oracle_bch

N = 5


def C(n, N=N, offset=False):
    return TruncationContext(n, N, offset)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# ---------------------------------------------------------------- 1


@pytest.mark.criterion(1, "BCH fidelity")
def test_bch_fidelity():
    with Timer() as t:
        c = C(2, 3)
        b = bch(LieElem.generator(c, 1), LieElem.generator(c, 2))
        displayed = {(1,): mpq(1), (2,): mpq(1), (1, 2): mpq(1, 2), (1, 1, 2): mpq(1, 12), (1, 2, 2): mpq(1, 12)}
        c6 = C(2, 6)
        b6 = bch(LieElem.generator(c6, 1), LieElem.generator(c6, 2))
        oracle = oracle_bch(6)
    # Lyndon coordinate of (1,2,2) is [[x1,x2],x2] = -[x2,[x1,x2]]
    assert b.terms() == displayed
    assert as_fractions(b6.as_ass()._p) == oracle
    assert t.elapsed < 1.0


# ---------------------------------------------------------------- 2


def _family(kind):
    if kind == "lie":
        return (lambda n, r: random_lie(C(n), r, max_degree=2), compose_graded, perm_act, LieElem.zero(C(1)))
    if kind == "ass":
        return (lambda n, r: random_ass(C(n), r, terms=3), compose_graded, perm_act, AssElem(C(1), {}))
    if kind == "cyc":
        return (lambda n, r: random_cyc(C(n), r, terms=3), compose_graded, perm_act, CycElem(C(1), {}))
    return (lambda n, r: random_tder(C(n), r, max_degree=2), tder_compose, tder_perm, TDer.zero(C(1)))


def _operad_axioms(kind, rng, instances):
    gen, comp, perm, unit = _family(kind)
    for _ in range(instances):
        n, m, k = (rng.randint(1, 3) for _ in range(3))
        f, g, h = gen(n, rng), gen(m, rng), gen(k, rng)
        i = rng.randint(1, n)
        # unitality
        assert comp(f, i, unit) == f and comp(unit, 1, f) == f
        # sequential associativity
        j = rng.randint(1, m)
        assert comp(comp(f, i, g), i + j - 1, h) == comp(f, i, comp(g, j, h))
        # parallel associativity
        if n >= 2:
            a, b = sorted(rng.sample(range(1, n + 1), 2))
            assert comp(comp(f, b, h), a, g) == comp(comp(f, a, g), b + m - 1, h)
        # equivariance in both arguments
        sigma = tuple(rng.sample(range(1, n + 1), n))
        tau_ = tuple(rng.sample(range(1, m + 1), m))
        s = sigma[i - 1]
        ident_m = tuple(range(1, m + 1))
        assert comp(perm(sigma, f), i, g) == perm(perm_insert(sigma, s, ident_m), comp(f, s, g))
        ident_n = tuple(range(1, n + 1))
        assert comp(f, i, perm(tau_, g)) == perm(perm_insert(ident_n, i, tau_), comp(f, i, g))


def _special(rng, n):
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    f = random_lie(C(len(pairs)), rng, max_degree=2)
    return eval_t_series(f, [t_gen(n, a, b, N) for a, b in pairs])


@pytest.mark.criterion(2, "operad axiom suite")
def test_operad_axioms():
    rng = random.Random(2)
    with Timer() as t:
        for kind in ("lie", "ass", "cyc", "tder"):
            _operad_axioms(kind, rng, 200)
        for _ in range(50):
            n, m = rng.randint(2, 3), rng.randint(2, 3)
            i = rng.randint(1, n)
            u, u2, v, v2 = _special(rng, n), _special(rng, n), _special(rng, m), _special(rng, m)
            assert is_special(tder_compose(u, i, v))[0]
            lhs = tder_bracket(tder_compose(u, i, v), tder_compose(u2, i, v2))
            assert lhs == tder_compose(tder_bracket(u, u2), i, tder_bracket(v, v2))
    assert t.elapsed < 60


# ---------------------------------------------------------------- 3


@pytest.mark.criterion(3, "divergence and Jacobian cocycles")
def test_cocycles():
    rng = random.Random(3)
    with Timer() as t:
        for _ in range(100):
            n = rng.randint(1, 3)
            u, v = random_tder(C(n), rng, max_degree=2), random_tder(C(n), rng, max_degree=2)
            assert divergence(tder_bracket(u, v)) == cyc_apply(u, divergence(v)) - cyc_apply(v, divergence(u))
            F, G = random_taut(C(n), rng, max_degree=2), random_taut(C(n), rng, max_degree=2)
            assert jacobian(taut_mul(F, G)) == jacobian(F) + taut_apply(F, jacobian(G))
            m, i = rng.randint(1, 3), rng.randint(1, n)
            H = random_taut(C(m), rng, max_degree=2)
            assert jacobian(taut_compose(F, i, H)) == compose_graded(jacobian(F), i, jacobian(H))
    assert t.elapsed < 60


# ---------------------------------------------------------------- 4


@pytest.mark.criterion(4, "Drinfeld-Kohno relations and composition")
def test_drinfeld_kohno():
    with Timer() as t:
        for n in range(2, 6):
            pairs = list(itertools.combinations(range(1, n + 1), 2))
            gens = {p: t_gen(n, *p, N) for p in pairs}
            assert all(is_special(g.rep)[0] for g in gens.values())
            for (a, b), (c, d) in itertools.combinations(pairs, 2):
                if len({a, b, c, d}) == 4:
                    assert dk_bracket(gens[a, b], gens[c, d]).is_zero()
            for i, j, k in itertools.permutations(range(1, n + 1), 3):
                s = t_gen(n, i, k, N) + t_gen(n, j, k, N)
                assert dk_bracket(t_gen(n, i, j, N), s).is_zero()
        for n, m in itertools.product((2, 3), (1, 2, 3)):
            for i, j in itertools.combinations(range(1, n + 1), 2):
                for alpha in range(1, n + 1):
                    want = dk_zero(n + m - 1, N)
                    for p, q in case_formula(i, j, alpha, m):
                        want = want + t_gen(n + m - 1, p, q, N)
                    assert dk_compose(t_gen(n, i, j, N), alpha, dk_zero(m, N)) == want
    assert t.elapsed < 10


# ---------------------------------------------------------------- 5


@pytest.mark.criterion(5, "moperad embeddings")
def test_moperad_embeddings():
    rng = random.Random(5)
    with Timer() as t:
        for _ in range(100):
            n = rng.randint(1, 3)
            a, b = random_lie(C(n), rng, max_degree=2), random_lie(C(n), rng, max_degree=2)
            u = _special(rng, n) if n >= 2 else TDer.zero(C(1))
            d = random_tder(C(n), rng, max_degree=2)
            assert kappa(tder_apply(u, a)) == tder_bracket(plus(u), kappa(a))
            assert lambda_map(tder_apply(d, a)) == tder_bracket(plus(d), lambda_map(a))
            assert kappa(bracket(a, b)) == tder_bracket(kappa(a), kappa(b))
        for _ in range(20):
            i = rng.randint(1, 2)
            x = iota(random_lie(C(2), rng, max_degree=2), _special(rng, 2))
            y = iota(random_lie(C(2), rng, max_degree=2), _special(rng, 2))
            assert iota_preimage(moperad_compose0(x, y)) is not None
            assert iota_preimage(tder_compose(x, i, _special(rng, 2))) is not None
            p = eta(random_lie(C(2), rng, max_degree=2), random_tder(C(2), rng, max_degree=2))
            q = eta(random_lie(C(2), rng, max_degree=2), random_tder(C(2), rng, max_degree=2))
            assert eta_preimage(moperad_compose0(p, q)) is not None
            assert eta_preimage(tder_compose(p, i, random_tder(C(2), rng, max_degree=2))) is not None
    assert t.elapsed < 60


# ---------------------------------------------------------------- 6


@pytest.mark.criterion(6, "associator solver")
def test_associator_solver():
    equations = ("I", "H", "H1", "H2", "P")
    a4 = solve_associator(4, 1)
    assert all(residual(eq, a4).passed for eq in equations)
    x1, x2 = LieElem.generator(lie2(4), 1), LieElem.generator(lie2(4), 2)
    assert a4.f.degree_part(2) == bracket(x1, x2).scaled(mpq(1, 24))
    with Timer() as t5:
        a5 = solve_associator(5, 1)
    assert all(residual(eq, a5).passed for eq in equations)
    assert t5.elapsed < 300


@pytest.mark.criterion(6, "associator solver")
def test_associator_solver_degree_six():
    with Timer() as t:
        a = solve_associator(6, 1)
    assert all(residual(eq, a).passed for eq in ("I", "H", "H1", "H2", "P"))
    assert t.elapsed < 1800


# ---------------------------------------------------------------- 7


@pytest.mark.criterion(7, "moperad extension")
def test_moperad_extension(assoc5):
    with Timer() as t:
        m = extend_to_moperad(assoc5)
        ok = residual("MP", m).passed and residual("O", m).passed
    assert m.g == m.f == assoc5.f
    assert ok and t.elapsed < 120


# ---------------------------------------------------------------- 8


@pytest.mark.criterion(8, "KV construction from moperad data")
def test_kv_construction(moperad5):
    F = build_F012(moperad5)
    assert check_kv1(F).passed
    assert len(duflo_extract(F)) == N - 1
    # negative control: data (1, 0, 0) read directly as the conjugator tuple (1, e^{-s/2})
    c = C(2)
    x1, x2 = LieElem.generator(c, 1), LieElem.generator(c, 2)
    half = AssElem(c, P.exp((x1 + x2).scaled(mpq(-1, 2))._p, N))
    r = check_kv1(TAut.from_conjugators(c, [AssElem.one(c), half]))
    assert not r.passed and r.first_nonzero_degree == 2
    assert r.defect.degree_part(2) == bracket(x1, x2)


# ---------------------------------------------------------------- 9


WORDS3 = ["0((12)3)", "0(1(23))"]
WORDS4 = ["0(((12)3)4)", "0((1(23))4)", "0((12)(34))", "0(1((23)4))", "0(1(2(34)))"]


@pytest.mark.criterion(9, "genus-zero solutions for every bracketing")
def test_genus_zero(kv5, assoc5):
    F = kv5.F
    assert build_F0w("0(1(23))", kv5).F == taut_compose(F, 2, F)
    assert pentagon_image_residual(F, assoc5.f).passed
    for w in WORDS3 + WORDS4:
        S = build_F0w(w, kv5)
        assert check_kv1(S.F).passed
        assert duflo_extract(S.F) == kv5.h


# ---------------------------------------------------------------- 10


@pytest.mark.criterion(10, "KV associator")
def test_kv_associator(kv5, assoc5):
    with Timer() as t:
        G = kv_associator(kv5.F)
        assert is_special(G.log)[0]
        assert G == eval_t_group(assoc5.f, [t_gen(3, 1, 2, N), t_gen(3, 2, 3, N)])
        assert pentagon_taut_value(G).is_zero()
    assert t.elapsed < 120


# ---------------------------------------------------------------- 11


@pytest.mark.criterion(11, "twist and symmetry identities")
def test_symmetry_algebra(kv5, moperad5_alt):
    assert all(r.passed for r in b_identities(N))
    for F in (kv5.F, build_F012(moperad5_alt)):
        assert check_kv1(F).passed
        assert all(r.passed for r in f_identities(F))
        assert tau(tau(F)) == F


# ---------------------------------------------------------------- 12


@pytest.mark.criterion(12, "symmetry group actions")
def test_symmetry_actions(kv5, moperad5, moperad5_alt):
    e = gt1_ratio(moperad5, moperad5_alt)
    assert residual("octagon-gt", e).passed
    G = gt1_to_kv(e)
    F = kv5.F
    H = taut_mul(taut_mul(F, G), F.inverse())
    assert check_krv1(H).passed and check_krv2(H).passed
    FH = group_act("right-KRV", H, kv5).F
    assert taut_mul(taut_compose(H, 2, H).inverse(), taut_compose(F, 2, F)) == taut_compose(FH, 2, FH)
    assert gt1_to_kv(GT1Element.identity(N)).is_identity()
    c = G.ctx
    X1, X2 = (AssElem(c, P.exp({(l,): P.ONE}, N)) for l in (1, 2))
    assert taut_apply(G, X1 * X2) == X1 * X2


# ---------------------------------------------------------------- 13


def _cli(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


@pytest.mark.criterion(13, "determinism and serialization")
def test_determinism_and_serialization(tmp_path, capsys, assoc5, moperad5, moperad5_alt, kv5):
    runs = [
        ["bch", "--degree", "5", "--generators", "3"],
        ["solve-associator", "--degree", "4"],
        ["selftest", "--degree", "3", "--seed", "11"],
    ]
    for argv in runs:
        first, second = _cli(argv, capsys), _cli(argv, capsys)
        assert first == second and first[0] == 0
    rng = random.Random(13)
    values = [
        random_lie(C(3), rng),
        random_ass(C(2), rng),
        random_cyc(C(2), rng),
        random_tder(C(2), rng),
        t_gen(3, 1, 2, N).rep,
        random_taut(C(2), rng),
        TAut(t_gen(3, 1, 3, N).rep),
        t_gen(4, 2, 4, N),
        residual("P", assoc5),
        check_kv1(TAut(TDer(C(2), [LieElem.zero(C(2)), LieElem.generator(C(2), 1)]))),
        assoc5,
        moperad5,
        gt1_ratio(moperad5, moperad5_alt),
        kv5,
    ]
    kinds = set()
    for x in values:
        text = dumps(to_json(x))
        kinds.add(json.loads(text).get("kind", "residual"))
        back = loads(text)
        assert back == x
        assert dumps(to_json(back)) == text
    assert kinds == {"lie", "ass", "cyc", "tder", "sder", "taut", "saut", "dk", "residual",
                     "associator", "moperad", "gt1", "kvsolution"}
