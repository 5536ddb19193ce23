import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kvforge.chord import (
    case_formula,
    center,
    dk_bracket,
    dk_compose,
    dk_zero,
    eta,
    eta_preimage,
    eval_t_series,
    iota,
    iota_preimage,
    kappa,
    lambda_map,
    moperad_compose0,
    moperad_unit,
    plus,
    t_gen,
    zero_compose_formula,
)
from kvforge.derivations import is_special, tder_apply, tder_bracket, tder_compose
from kvforge.lie import bracket

from conftest import lie, seeds, tder

N = 3


def pairs(n, lo=1):
    return list(itertools.combinations(range(lo, n + 1), 2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_drinfeld_kohno_relations(n):
    for (i, j), (k, l) in itertools.product(pairs(n), repeat=2):
        a, b = t_gen(n, i, j, N), t_gen(n, k, l, N)
        if len({i, j, k, l}) == 4:
            assert dk_bracket(a, b).is_zero()
    for i, j, k in itertools.permutations(range(1, n + 1), 3):
        s = t_gen(n, i, k, N) + t_gen(n, j, k, N)
        assert dk_bracket(t_gen(n, i, j, N), s).is_zero()


def test_generators_are_symmetric_and_special():
    assert t_gen(3, 1, 2, N) == t_gen(3, 2, 1, N)
    assert all(is_special(t_gen(4, i, j, N).rep)[0] for i, j in pairs(4))


def test_shifted_relations():
    n = 3
    for i, j, k in itertools.permutations(range(0, n + 1), 3):
        s = t_gen(n, i, k, N, True) + t_gen(n, j, k, N, True)
        assert dk_bracket(t_gen(n, i, j, N, True), s).is_zero()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_center_is_central(n):
    c = center(n, N)
    assert all(dk_bracket(c, t_gen(n, i, j, N)).is_zero() for i, j in pairs(n))


def test_generator_composed_with_zero_matches_case_formula():
    for n in (2, 3):
        for m in (1, 2, 3):
            for i, j in pairs(n):
                for alpha in range(1, n + 1):
                    got = dk_compose(t_gen(n, i, j, N), alpha, dk_zero(m, N))
                    want = dk_zero(n + m - 1, N)
                    for p, q in case_formula(i, j, alpha, m):
                        want = want + t_gen(n + m - 1, p, q, N)
                    assert got == want, (n, m, i, j, alpha)


def test_zero_composed_with_generator():
    for n in (1, 2, 3):
        for m in (2, 3):
            for k, l in pairs(m):
                for alpha in range(1, n + 1):
                    got = dk_compose(dk_zero(n, N), alpha, t_gen(m, k, l, N))
                    assert got == t_gen(n + m - 1, *zero_compose_formula(k, l, alpha), N)


def test_case_formula_examples():
    assert case_formula(1, 2, 1, 2) == [(1, 3), (2, 3)]
    assert case_formula(1, 3, 2, 2) == [(1, 4)]
    assert case_formula(2, 3, 1, 2) == [(3, 4)]


def _special(seed, n=3, N=5):
    args = [t_gen(n, i, j, N) for i, j in pairs(n)]
    f = lie(len(args), seed, N=N, top=2)
    return eval_t_series(f, args)


@given(seeds, seeds)
def test_kappa_intertwines_special_action(s1, s2):
    u, a = _special(s1), lie(3, s2)
    assert kappa(tder_apply(u, a)) == tder_bracket(plus(u), kappa(a))


@given(seeds, seeds)
def test_kappa_is_a_lie_morphism(s1, s2):
    a, b = lie(2, s1), lie(2, s2)
    assert kappa(bracket(a, b)) == tder_bracket(kappa(a), kappa(b))


@given(seeds, seeds)
def test_lambda_intertwines_tangential_action(s1, s2):
    d, a = tder(3, s1), lie(3, s2)
    assert lambda_map(tder_apply(d, a)) == tder_bracket(plus(d), lambda_map(a))


@given(seeds, seeds)
def test_kappa_image_is_special(s1, s2):
    assert is_special(iota(lie(2, s1), _special(s2, n=2)))[0]


@given(seeds, seeds, seeds, st.sampled_from([1, 2]))
def test_iota_image_closed_under_compositions(s1, s2, s3, i):
    x = iota(lie(2, s1), _special(s2, n=2))
    y = iota(lie(2, s3), _special(s3 + 1, n=2))
    a, u = iota_preimage(x)
    assert iota(a, u) == x
    assert iota_preimage(moperad_compose0(x, y)) is not None
    assert iota_preimage(tder_compose(x, i, _special(s3, n=2))) is not None


@given(seeds, seeds, seeds, st.sampled_from([1, 2]))
def test_eta_image_closed_under_compositions(s1, s2, s3, i):
    x = eta(lie(2, s1), tder(2, s2))
    y = eta(lie(2, s3), tder(2, s3 + 1))
    assert eta_preimage(x) == (lie(2, s1), tder(2, s2))
    assert eta_preimage(moperad_compose0(x, y)) is not None
    assert eta_preimage(tder_compose(x, i, tder(2, s3))) is not None


def test_moperad_unit():
    x = iota(lie(2, 1), _special(2, n=2))
    assert moperad_compose0(moperad_unit(5), x) == x


def test_iota_rejects_non_special():
    with pytest.raises(ValueError):
        iota(lie(2, 1), tder(2, 3))
