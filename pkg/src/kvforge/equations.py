"""Associator, moperad and Grothendieck-Teichmueller equations, and the solver.

Every equation is written as lhs = rhs with both sides products of
exponentials.  The residual is log(lhs * rhs^-1); it vanishes at truncation
exactly when the equation holds.  Because each side is a product of
exponentials of series without constant term, the degree-d part of the
residual is affine in the degree-d part of the unknowns, which the solver
exploits degree by degree.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from gmpy2 import mpq
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from . import _poly as P
from .chord import center, eval_t_series, t_gen
from .derivations import (
    TAut,
    TDer,
    taut_compose_one,
    taut_one_compose,
    tder_bch,
)
from .lie import (
    AssElem,
    LieElem,
    TruncationContext,
    bch,
    lie_elem,
    log_primitive,
    lyndon_basis,
    lyndon_expansion,
    scalar,
    substitute,
)

PINNING_VERSION = 1

LIE_EQUATIONS = ("I", "H")
TDER_EQUATIONS = ("H1", "H2", "P", "MP", "O")
ASSOCIATOR_EQUATIONS = ("I", "H", "P")


class InfeasibleError(ValueError):
    def __init__(self, degree: int, what: str = "system"):
        super().__init__(f"{what} is infeasible in degree {degree}")
        self.degree = degree


class ResidualFailure(ValueError):
    pass


def lie2(N: int) -> TruncationContext:
    return TruncationContext(2, N, False)


@dataclass(frozen=True)
class Residual:
    equation: str
    passed: bool
    first_nonzero_degree: int | None
    defect: object = field(default=None, compare=False)

    @classmethod
    def of(cls, equation: str, value) -> "Residual":
        d = value.min_degree()
        if d is None:
            return cls(equation, True, None, None)
        return cls(equation, False, d, value)

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class AssociatorData:
    mu: mpq
    f: LieElem
    free: tuple = ()

    @property
    def max_degree(self) -> int:
        return self.f.ctx.max_degree


@dataclass(frozen=True)
class MoperadIsoData:
    mu: mpq
    f: LieElem
    g: LieElem

    @property
    def max_degree(self) -> int:
        return self.f.ctx.max_degree


@dataclass(frozen=True)
class GT1Element:
    lam: mpq
    f: AssElem
    g: AssElem

    @property
    def max_degree(self) -> int:
        return self.f.ctx.max_degree

    @classmethod
    def identity(cls, N: int) -> "GT1Element":
        one = AssElem.one(lie2(N))
        return cls(mpq(1), one, one)


# ---------------------------------------------------------------- factor lists


def _restrict(f: LieElem, N: int) -> LieElem:
    if f.ctx.max_degree < N:
        raise ValueError(f"series known only through degree {f.ctx.max_degree}, need {N}")
    return f.truncated(N) if f.ctx.max_degree > N else f


def _lie_factors(eq: str, mu, f: LieElem, N: int):
    ctx = lie2(N)
    f = _restrict(f, N)
    x1, x2 = LieElem.generator(ctx, 1), LieElem.generator(ctx, 2)
    x3 = -(x1 + x2)
    F = lambda a, b: substitute(f, [a, b])
    half = scalar(mu) / 2
    if eq == "I":
        return [F(x1, x2), F(x2, x1)], []
    if eq == "H":
        return [x1.scaled(half), F(x3, x1), x3.scaled(half), F(x2, x3), x2.scaled(half), F(x1, x2)], []
    raise ValueError(f"unknown equation {eq!r}")


def _tder_factors(eq: str, mu, f: LieElem | None, g: LieElem | None, N: int):
    mu = scalar(mu)
    half = mu / 2
    if eq in ("H1", "H2", "P"):
        n = 3 if eq != "P" else 4
        t = lambda i, j: t_gen(n, i, j, N)
        F = lambda a, b: eval_t_series(_restrict(f, N), [a, b])
        if eq == "H1":
            lhs = [(t(1, 2) + t(1, 3)).rep.scaled(half)]
            rhs = [-F(t(2, 3), t(1, 3)), t(1, 3).rep.scaled(half), F(t(1, 2), t(1, 3)),
                   t(1, 2).rep.scaled(half), -F(t(1, 2), t(2, 3))]
            return lhs, rhs
        if eq == "H2":
            lhs = [(t(1, 3) + t(2, 3)).rep.scaled(half)]
            rhs = [F(t(1, 3), t(1, 2)), t(1, 3).rep.scaled(half), -F(t(1, 3), t(2, 3)),
                   t(2, 3).rep.scaled(half), F(t(1, 2), t(2, 3))]
            return lhs, rhs
        lhs = [F(t(2, 3), t(3, 4)), F(t(1, 2) + t(1, 3), t(2, 4) + t(3, 4)), F(t(1, 2), t(2, 3))]
        rhs = [F(t(1, 2), t(2, 3) + t(2, 4)), F(t(1, 3) + t(2, 3), t(3, 4))]
        return lhs, rhs
    if eq == "MP":
        t = lambda i, j: t_gen(3, i, j, N, shifted=True)
        G = lambda a, b: eval_t_series(_restrict(g, N), [a, b])
        F = lambda a, b: eval_t_series(_restrict(f, N), [a, b])
        lhs = [G(t(0, 1), t(1, 2) + t(1, 3)), G(t(0, 2) + t(1, 2), t(2, 3))]
        rhs = [F(t(1, 2), t(2, 3)), G(t(0, 1) + t(0, 2), t(1, 3) + t(2, 3)), G(t(0, 1), t(1, 2))]
        return lhs, rhs
    if eq == "O":
        t = lambda i, j: t_gen(2, i, j, N, shifted=True)
        G = lambda a, b: eval_t_series(_restrict(g, N), [a, b])
        g01, g02 = G(t(0, 1), t(1, 2)), G(t(0, 2), t(1, 2))
        lhs = [-g01, t(1, 2).rep.scaled(half), g02, t(0, 2).rep.scaled(mu), -g02,
               t(1, 2).rep.scaled(half), g01, t(0, 1).rep.scaled(mu),
               center(2, N, shifted=True).rep.scaled(-mu)]
        return lhs, []
    raise ValueError(f"unknown equation {eq!r}")


def equation_factors(eq: str, mu, f: LieElem | None, g: LieElem | None = None, N: int | None = None):
    """The two sides of an equation as lists of logarithms of the factors."""
    if N is None:
        N = (f if f is not None else g).ctx.max_degree
    if eq in LIE_EQUATIONS:
        return _lie_factors(eq, mu, f, N)
    return _tder_factors(eq, mu, f, g, N)


def _lie_product_log(logs: Sequence[LieElem]) -> LieElem:
    ctx = logs[0].ctx
    n = ctx.max_degree
    acc: P.Poly = {(): P.ONE}
    for a in logs:
        if a._p:
            acc = P.mul(acc, P.exp(a._p, n), n)
    return lie_elem(ctx, P.log(acc, n))


def _tder_product_log(logs: Sequence[TDer]) -> TDer:
    acc = None
    for a in logs:
        if a.is_zero():
            continue
        acc = a if acc is None else tder_bch(acc, a)
    return acc if acc is not None else TDer.zero(logs[0].ctx)


def product_log(logs):
    if isinstance(logs[0], LieElem):
        return _lie_product_log(logs)
    return _tder_product_log(logs)


def residual_value(eq: str, mu, f, g=None, N: int | None = None):
    lhs, rhs = equation_factors(eq, mu, f, g, N)
    return product_log(list(lhs) + [-r for r in reversed(rhs)])


def linear_part(eq: str, f, g=None, N: int | None = None):
    """Degree-wise linearization: the sum of factor logs at mu = 0."""
    lhs, rhs = equation_factors(eq, 0, f, g, N)
    acc = lhs[0] - lhs[0]
    for a in lhs:
        acc = acc + a
    for a in rhs:
        acc = acc - a
    return acc


# ---------------------------------------------------------------- residual dispatcher


def pentagon_taut_value(G: TAut) -> TDer:
    """log of G^{1,2,34} G^{12,3,4} (G^{2,3,4} G^{1,23,4} G^{1,2,3})^-1."""
    if G.arity != 3:
        raise ValueError("pentagon in TAut needs arity 3")
    ctx4 = TruncationContext(4, G.ctx.max_degree, False)
    c2 = TruncationContext(2, G.ctx.max_degree, False)
    a = taut_compose_one(G, 3, 2).log
    b = taut_compose_one(G, 1, 2).log
    c = taut_one_compose(c2, 2, G).log
    d = taut_compose_one(G, 2, 2).log
    e = taut_one_compose(c2, 1, G).log
    assert a.ctx == ctx4
    return _tder_product_log([a, b, -e, -d, -c])


def octagon_value(e: GT1Element) -> LieElem:
    """log of g(x,y)^-1 y^((l-1)/2) g(z,y) z^l g(z,y)^-1 y^((l+1)/2) g(x,y) x^l, zyx = 1."""
    ctx = e.g.ctx
    lam = scalar(e.lam)
    x1, x2 = LieElem.generator(ctx, 1), LieElem.generator(ctx, 2)
    lz = -bch(x2, x1)
    gl = log_primitive(e.g)
    gxy = gl
    gzy = substitute(gl, [lz, x2])
    logs = [-gxy, x2.scaled((lam - 1) / 2), gzy, lz.scaled(lam), -gzy,
            x2.scaled((lam + 1) / 2), gxy, x1.scaled(lam)]
    return _lie_product_log(logs)


def residual(eq: str, data) -> Residual:
    """Residual of one equation on associator, moperad, GT or TAut data."""
    if eq == "pentagon-taut":
        return Residual.of(eq, pentagon_taut_value(data))
    if eq == "octagon-gt":
        return Residual.of(eq, octagon_value(data))
    if eq in ("I", "H", "H1", "H2", "P"):
        return Residual.of(eq, residual_value(eq, data.mu, data.f))
    if eq in ("MP", "O"):
        g = getattr(data, "g", None)
        if g is None:
            raise ValueError(f"equation {eq} needs moperad data")
        return Residual.of(eq, residual_value(eq, data.mu, data.f, g))
    raise ValueError(f"unknown equation {eq!r}")


# ---------------------------------------------------------------- exact linear algebra


def _coords(x) -> dict:
    if isinstance(x, TDer):
        return {(k, w): c for k, s in enumerate(x.slot_polys()) for w, c in s.items()}
    return {(0, w): c for w, c in x._p.items()}


def solve_affine(columns: Sequence[dict], target: dict, free_values: Mapping[int, object] | None = None):
    """Solve sum_k c_k columns[k] = target over Q.

    Returns (solution, free column indices).  Free variables take the values
    in ``free_values`` (default 0); pivots follow reduced echelon form in the
    given column order.  Raises ValueError when inconsistent.
    """
    keys = sorted(set().union(target, *columns))
    idx = {k: r for r, k in enumerate(keys)}
    m, n = len(keys), len(columns)
    rows = [[QQ(0)] * (n + 1) for _ in range(m)]
    for j, col in enumerate(columns):
        for k, c in col.items():
            rows[idx[k]][j] = QQ(c)
    for k, c in target.items():
        rows[idx[k]][n] = QQ(c)
    if m == 0:
        rows = [[QQ(0)] * (n + 1)]
        m = 1
    M = DomainMatrix(rows, (m, n + 1), QQ)
    R, pivots = M.rref()
    pivots = tuple(pivots)
    if n in pivots:
        raise ValueError("inconsistent linear system")
    free = [j for j in range(n) if j not in pivots]
    vals = {j: scalar((free_values or {}).get(j, 0)) for j in free}
    Rl = R.to_list()
    sol = [mpq(0)] * n
    for j in free:
        sol[j] = vals[j]
    for r, p in enumerate(pivots):
        v = mpq(Rl[r][n])
        for j in free:
            if Rl[r][j]:
                v -= mpq(Rl[r][j]) * vals[j]
        sol[p] = v
    return sol, free


# ---------------------------------------------------------------- associator solver


def _basis_words(d: int) -> list[tuple[int, ...]]:
    return [w for w, _ in lyndon_basis(lie2(d))[d]]


def _degree_system(eqs, mu, f_low: LieElem, d: int, g_low=None, unknown="f"):
    """Affine system for the degree-d part of the unknown series."""
    words = _basis_words(d)
    ctx = lie2(d)
    target: dict = {}
    columns: list[dict] = [dict() for _ in words]
    for eq in eqs:
        f = f_low if unknown == "f" else f_low
        g = g_low
        r = residual_value(eq, mu, f, g, d).degree_part(d)
        for k, c in _coords(r).items():
            target[(eq,) + k] = -c
        for j, w in enumerate(words):
            b = LieElem(ctx, lyndon_expansion(w), check=False)
            zero = LieElem.zero(ctx)
            if unknown == "f":
                lin = linear_part(eq, b, None if eq not in ("MP", "O") else zero, d)
            else:
                lin = linear_part(eq, zero, b, d)
            for k, c in _coords(lin.degree_part(d)).items():
                columns[j][(eq,) + k] = c
    return words, columns, target


def _free_by_index(words, values):
    if not values:
        return None
    return {(words.index(tuple(k)) if not isinstance(k, int) else k): v for k, v in values.items()}


def _cache_path(cache_dir, eqs, mu, N) -> Path | None:
    cache_dir = os.environ.get("KVFORGE_CACHE") or cache_dir
    if not cache_dir:
        return None
    mu = scalar(mu)
    name = f"assoc_{'-'.join(eqs)}_mu{mu.numerator}_{mu.denominator}_N{N}_v{PINNING_VERSION}.json"
    return Path(cache_dir) / name


def solve_associator(
    N: int,
    mu=1,
    equations: Sequence[str] = ASSOCIATOR_EQUATIONS,
    free_values: Mapping[int, Mapping[int, object]] | None = None,
    cache_dir: str | os.PathLike | None = None,
) -> AssociatorData:
    """Degree-by-degree exact solution of the associator equations.

    ``free_values`` maps a degree to {Lyndon word or column index: value};
    by default every free coordinate is zero.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    mu = scalar(mu)
    path = _cache_path(cache_dir, tuple(equations), mu, N) if not free_values else None
    if path is not None and path.exists():
        from .serialize import associator_from_json

        return associator_from_json(json.loads(path.read_text()))
    coords: dict = {}
    free_record = []
    for d in range(2, N + 1):
        f_low = LieElem.from_lyndon(lie2(d), coords)
        words, columns, target = _degree_system(equations, mu, f_low, d)
        try:
            sol, free = solve_affine(columns, target, _free_by_index(words, (free_values or {}).get(d)))
        except ValueError:
            raise InfeasibleError(d, "associator system") from None
        for w, c in zip(words, sol):
            if c:
                coords[w] = c
        free_record.append((d, tuple(words[j] for j in free)))
    out = AssociatorData(mu, LieElem.from_lyndon(lie2(N), coords), tuple(free_record))
    if path is not None:
        from .serialize import associator_to_json, dumps

        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(associator_to_json(out)))
    return out


def extend_to_moperad(a: AssociatorData, check: bool = True) -> MoperadIsoData:
    """g := f; the mixed pentagon and octagon are verified, not assumed."""
    data = MoperadIsoData(a.mu, a.f, a.f)
    if check:
        for eq in ("MP", "O"):
            r = residual(eq, data)
            if not r.passed:
                raise ResidualFailure(f"{eq} fails in degree {r.first_nonzero_degree}")
    return data


def moperad_g_system(f: LieElem, mu, g_low: LieElem, d: int):
    """Affine constraints on the degree-d part of g.

    The mixed pentagon constrains g_d at degree d; the octagon is blind to
    g_d at degree d, so it enters through its degree-(d+1) part, which is
    affine in g_d (finite differences are exact for d >= 2).
    """
    words, columns, target = _degree_system(("MP",), mu, f.truncated(d), d, g_low, unknown="g")
    ctx1 = lie2(d + 1)
    base_g = LieElem(ctx1, g_low._p, check=False)
    base = residual_value("O", mu, None, base_g, d + 1).degree_part(d + 1)
    for k, c in _coords(base).items():
        target[("O",) + k] = -c
    for j, w in enumerate(words):
        gb = LieElem(ctx1, P.add(g_low._p, lyndon_expansion(w)), check=False)
        diff = residual_value("O", mu, None, gb, d + 1).degree_part(d + 1) - base
        for k, c in _coords(diff).items():
            columns[j][("O",) + k] = c
    return words, columns, target


def solve_moperad_g(f: LieElem, mu=1, free_values=None) -> tuple[LieElem, list[tuple[int, int]]]:
    """Independent solve of the mixed pentagon and octagon for g given f.

    Returns g and, per degree, the dimension of the affine solution space.
    """
    N = f.ctx.max_degree
    coords: dict = {}
    dims = []
    for d in range(2, N + 1):
        g_low = LieElem.from_lyndon(lie2(d), coords)
        words, columns, target = moperad_g_system(f, mu, g_low, d)
        try:
            sol, free = solve_affine(columns, target, _free_by_index(words, (free_values or {}).get(d)))
        except ValueError:
            raise InfeasibleError(d, "moperad system") from None
        dims.append((d, len(free)))
        for w, c in zip(words, sol):
            if c:
                coords[w] = c
    return LieElem.from_lyndon(lie2(N), coords), dims


def g_satisfies_system(f: LieElem, mu, g: LieElem) -> bool:
    """Whether g solves the degree-wise moperad systems with its own lower parts."""
    for d in range(2, f.ctx.max_degree + 1):
        g_low = g.truncated(d - 1)
        g_low = LieElem(lie2(d), g_low._p, check=False)
        words, columns, target = moperad_g_system(f, mu, g_low, d)
        gd = g.degree_part(d).terms()
        acc: dict = {}
        for j, w in enumerate(words):
            c = gd.get(w, 0)
            if c:
                P.add_into(acc, columns[j], c)
        if P.clean(acc) != P.clean(target):
            return False
    return True


# ---------------------------------------------------------------- GT^1 arithmetic


def _grouplike_sub(h: AssElem, a: LieElem, b: LieElem) -> AssElem:
    """h(e^a, e^b) for h group-like in the letters x1, x2 (x_i = log of a generator)."""
    return substitute(h, [a.as_ass(), b.as_ass()])


def gt1_mul(a: GT1Element, b: GT1Element) -> GT1Element:
    """(l1 l2, f1 f2(x1^l1, f1^-1 x2^l1 f1), g1 g2(x1^l1, g1^-1 x2^l1 g1))."""
    ctx = a.f.ctx
    lam = scalar(a.lam)
    x1, x2 = LieElem.generator(ctx, 1), LieElem.generator(ctx, 2)

    def part(h1: AssElem, h2: AssElem) -> AssElem:
        conj = h1.inverse() * x2.scaled(lam).as_ass() * h1
        sub = substitute(h2, [x1.scaled(lam).as_ass(), conj])
        return h1 * sub

    return GT1Element(lam * scalar(b.lam), part(a.f, b.f), part(a.g, b.g))


def gt_octagon_check(e: GT1Element) -> Residual:
    return Residual.of("octagon-gt", octagon_value(e))


def _invert_conjugation(target: LieElem, h: LieElem) -> LieElem:
    """Solve l(x1, e^-h x2 e^h) = target for the Lie series l."""
    ctx = target.ctx
    N = ctx.max_degree
    x1 = LieElem.generator(ctx, 1).as_ass()
    eh = P.exp(h._p, N)
    conj = AssElem(ctx, P.mul(P.mul(P.inverse(eh, N), {(2,): P.ONE}, N), eh, N))
    ell = target
    for _ in range(N):
        img = substitute(ell.as_ass(), [x1, conj])
        delta = target.as_ass() - img
        if delta.is_zero():
            break
        ell = ell + LieElem(ctx, delta._p, check=False)
    return ell


def gt1_ratio(a: MoperadIsoData, b: MoperadIsoData) -> GT1Element:
    """The element e with a * e = b under the right torsor action (mu = lambda = 1)."""
    if a.mu != 1 or b.mu != 1:
        raise ValueError("ratio implemented for coupling constant 1")
    ctx = a.f.ctx

    def part(h: LieElem, h2: LieElem) -> AssElem:
        # h2 = h . k(x1, h^-1 x2 h)  =>  k(x1, h^-1 x2 h) = h^-1 h2
        t = bch(-h, h2)
        return AssElem(ctx, P.exp(_invert_conjugation(t, h)._p, ctx.max_degree))

    return GT1Element(mpq(1), part(a.f, b.f), part(a.g, b.g))


def moperad_act(a: MoperadIsoData, e: GT1Element) -> MoperadIsoData:
    """(mu, f, g) * (lambda, f', g') with x1 -> e^{mu x1}, x2 -> h^-1 e^{lambda x2} h."""
    ctx = a.f.ctx
    N = ctx.max_degree
    mu, lam = scalar(a.mu), scalar(e.lam)
    x1, x2 = LieElem.generator(ctx, 1), LieElem.generator(ctx, 2)

    def part(h: LieElem, k: AssElem) -> LieElem:
        eh = AssElem(ctx, P.exp(h._p, N))
        conj = eh.inverse() * x2.scaled(lam).as_ass() * eh
        sub = substitute(k, [x1.scaled(mu).as_ass(), conj])
        return log_primitive(eh * sub)

    return MoperadIsoData(mu * lam, part(a.f, e.f), part(a.g, e.g))
