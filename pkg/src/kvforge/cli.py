"""kvforge command line: exact truncated computations with JSON input/output.

Exit codes: 0 success, 1 residual or verification failure, 2 parse or usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from gmpy2 import mpq

from . import serialize as S
from .derivations import TAut, taut_compose
from .equations import (
    AssociatorData,
    GT1Element,
    InfeasibleError,
    MoperadIsoData,
    Residual,
    extend_to_moperad,
    gt1_ratio,
    residual,
    solve_associator,
)
from .kv import (
    DufloFailure,
    KVSolution,
    b_identities,
    build_F012,
    build_F0w,
    check_krv1,
    check_krv2,
    check_kv1,
    check_kv2,
    check_kvg1,
    check_kvg2,
    duflo_extract,
    group_act,
    gt1_to_kv,
    kv_associator,
    kv_compose,
    kv_solution,
)
from .lie import LieElem, TruncationContext, bch_many, fmt_scalar

EXIT_OK, EXIT_RESIDUAL, EXIT_PARSE, EXIT_IO = 0, 1, 2, 3
DEFAULT_SEED = 20240601
COMMANDS = (
    "bch",
    "solve-associator",
    "extend-moperad",
    "build-kv",
    "build-f0w",
    "compose",
    "duflo",
    "check",
    "act",
    "gt1",
    "selftest",
)
EQUATIONS = (
    "I", "H", "H1", "H2", "P", "pentagon", "MP", "O", "kv1", "kv2", "krv1", "krv2",
    "kvg1", "kvg2", "pentagon-taut", "octagon-gt", "yb", "theta-b",
)


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


@dataclass
class CommandConfig:
    command: str
    degree: int | None = None
    generators: int = 2
    mu: mpq = mpq(1)
    seed: int = DEFAULT_SEED
    slot: int | None = None
    eq: str | None = None
    word: str | None = None
    inp: str | None = None
    left: str | None = None
    right: str | None = None
    out: str = "-"
    cache_dir: str | None = None
    fmt: str = "json"
    mode: str = "additive"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kvforge", description="Exact Kashiwara-Vergne and associator computations.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--degree", type=int)
    p.add_argument("--generators", type=int, default=2)
    p.add_argument("--mu", default="1")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--slot", type=int)
    p.add_argument("--eq", choices=EQUATIONS)
    p.add_argument("--word")
    p.add_argument("--in", dest="inp")
    p.add_argument("--left")
    p.add_argument("--right")
    p.add_argument("--out", default="-")
    p.add_argument("--cache-dir")
    p.add_argument("--format", dest="fmt", choices=("json", "text"), default="json")
    p.add_argument("--mode", choices=("additive", "bch"), default="additive")
    return p


def parse_args(argv) -> CommandConfig:
    ns = build_parser().parse_args(argv)
    try:
        mu = mpq(ns.mu)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"invalid --mu {ns.mu!r}") from None
    if ns.degree is not None and ns.degree < 1:
        raise UsageError("--degree must be at least 1")
    if ns.generators < 1:
        raise UsageError("--generators must be at least 1")
    cache = os.environ.get("KVFORGE_CACHE") or ns.cache_dir
    return CommandConfig(
        ns.command, ns.degree, ns.generators, mu, ns.seed, ns.slot, ns.eq, ns.word,
        ns.inp, ns.left, ns.right, ns.out, cache, ns.fmt, ns.mode,
    )


# ---------------------------------------------------------------- I/O


def _read(path: str | None, what: str):
    if path is None:
        raise UsageError(f"missing {what}")
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return S.loads(text)


def _expect(obj, types, what: str):
    if not isinstance(obj, types):
        raise S.ParseError(f"{what}: unexpected input kind {type(obj).__name__}")
    return obj


def _text(obj) -> str:
    if isinstance(obj, Residual):
        status = "pass" if obj.passed else f"FAIL at degree {obj.first_nonzero_degree}"
        return f"{obj.equation}: {status}"
    if isinstance(obj, list):
        return "\n".join(_text(o) for o in obj)
    if isinstance(obj, dict) and obj.get("kind") == "selftest":
        return "\n".join(f"{c['name']}: {'pass' if c['pass'] else 'FAIL'}" for c in obj["checks"])
    if isinstance(obj, dict):
        return json.dumps(obj, sort_keys=True)
    return repr(obj)


def _render(obj, fmt: str) -> str:
    if fmt == "text":
        return _text(obj) + "\n"
    if isinstance(obj, list):
        return S.dumps([_json(o) for o in obj])
    return S.dumps(_json(obj))


def _json(obj):
    return obj if isinstance(obj, dict) else S.to_json(obj)


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from None


# ---------------------------------------------------------------- commands


def _need_degree(cfg: CommandConfig) -> int:
    if cfg.degree is None:
        raise UsageError(f"{cfg.command} needs --degree")
    return cfg.degree


def _cmd_bch(cfg):
    N = _need_degree(cfg)
    ctx = TruncationContext(max(cfg.generators, 2), N, False)
    return bch_many([LieElem.generator(ctx, l) for l in ctx.letters]), True


def _cmd_solve(cfg):
    N = _need_degree(cfg)
    try:
        a = solve_associator(N, cfg.mu, cache_dir=cfg.cache_dir)
    except InfeasibleError as exc:
        return {"error": str(exc), "degree": exc.degree}, False
    ok = all(residual(eq, a).passed for eq in ("I", "H", "P"))
    return a, ok


def _cmd_extend(cfg):
    a = _expect(_read(cfg.inp, "--in"), AssociatorData, "extend-moperad")
    m = extend_to_moperad(a, check=False)
    return m, all(residual(eq, m).passed for eq in ("MP", "O"))


def _cmd_build_kv(cfg):
    m = _expect(_read(cfg.inp, "--in"), MoperadIsoData, "build-kv")
    F = build_F012(m)
    r1 = check_kv1(F)
    if not r1.passed:
        return r1, False
    try:
        return KVSolution(F, duflo_extract(F)), True
    except DufloFailure as exc:
        return Residual("kv2", False, exc.degree, exc.defect), False


def _as_solution(obj, what: str) -> KVSolution:
    if isinstance(obj, KVSolution):
        return obj
    if isinstance(obj, TAut):
        return kv_solution(obj)
    raise S.ParseError(f"{what}: expected a KV solution")


def _cmd_build_f0w(cfg):
    if cfg.word is None:
        raise UsageError("build-f0w needs --word")
    sol = _as_solution(_read(cfg.inp, "--in"), "build-f0w")
    try:
        return build_F0w(cfg.word, sol), True
    except ValueError as exc:
        raise S.ParseError(str(exc)) from None


def _cmd_compose(cfg):
    if cfg.slot is None:
        raise UsageError("compose needs --slot")
    a, b = _read(cfg.left, "--left"), _read(cfg.right, "--right")
    if isinstance(a, KVSolution) and isinstance(b, KVSolution):
        return kv_compose(a, cfg.slot, b), True
    a, b = (x.F if isinstance(x, KVSolution) else x for x in (a, b))
    _expect(a, TAut, "--left")
    _expect(b, TAut, "--right")
    return taut_compose(a, cfg.slot, b), True


def _cmd_duflo(cfg):
    obj = _read(cfg.inp, "--in")
    F = obj.F if isinstance(obj, KVSolution) else _expect(obj, TAut, "duflo")
    try:
        h = duflo_extract(F, cfg.mode)
    except DufloFailure as exc:
        return Residual("kv2" if cfg.mode == "additive" else "kvg2", False, exc.degree, exc.defect), False
    return {"kind": "duflo", "mode": cfg.mode, "coefficients": [fmt_scalar(c) for c in h]}, True


_TAUT_CHECKS = {
    "kv1": check_kv1, "kv2": check_kv2, "krv1": check_krv1, "krv2": check_krv2,
    "kvg1": check_kvg1, "kvg2": check_kvg2,
}


def _cmd_check(cfg):
    if cfg.eq is None:
        raise UsageError("check needs --eq")
    eq = "P" if cfg.eq == "pentagon" else cfg.eq
    if eq in ("yb", "theta-b"):
        rs = [r for r in b_identities(_need_degree(cfg)) if r.equation == eq]
        return rs[0], rs[0].passed
    obj = _read(cfg.inp, "--in")
    if eq in _TAUT_CHECKS:
        F = obj.F if isinstance(obj, KVSolution) else _expect(obj, TAut, eq)
        r = _TAUT_CHECKS[eq](F)
    elif eq == "pentagon-taut":
        F = obj.F if isinstance(obj, KVSolution) else _expect(obj, TAut, eq)
        r = residual(eq, kv_associator(F) if F.arity == 2 else F)
    elif eq == "octagon-gt":
        r = residual(eq, _expect(obj, GT1Element, eq))
    elif eq in ("MP", "O"):
        r = residual(eq, _expect(obj, MoperadIsoData, eq))
    else:
        r = residual(eq, _expect(obj, (AssociatorData, MoperadIsoData), eq))
    return r, r.passed


def _cmd_act(cfg):
    sol = _as_solution(_read(cfg.inp, "--in"), "act")
    if (cfg.left is None) == (cfg.right is None):
        raise UsageError("act needs exactly one of --left (KV group) or --right (KRV group)")
    side, path = ("left-KV", cfg.left) if cfg.left else ("right-KRV", cfg.right)
    G = _expect(_read(path, "group element"), TAut, "act")
    try:
        return group_act(side, G, sol), True
    except ValueError as exc:
        return {"error": str(exc)}, False


def _cmd_gt1(cfg):
    if cfg.inp is not None:
        e = _expect(_read(cfg.inp, "--in"), GT1Element, "gt1")
        return gt1_to_kv(e), True
    a = _expect(_read(cfg.left, "--left"), MoperadIsoData, "gt1")
    b = _expect(_read(cfg.right, "--right"), MoperadIsoData, "gt1")
    e = gt1_ratio(a, b)
    return e, residual("octagon-gt", e).passed


def _cmd_selftest(cfg):
    from .selftest import run_selftest

    results = run_selftest(cfg.degree or 4, cfg.seed)
    report = {"kind": "selftest", "degree": cfg.degree or 4, "seed": cfg.seed,
              "checks": [{"name": n, "pass": ok} for n, ok in results]}
    return report, all(ok for _, ok in results)


_DISPATCH = {
    "bch": _cmd_bch,
    "solve-associator": _cmd_solve,
    "extend-moperad": _cmd_extend,
    "build-kv": _cmd_build_kv,
    "build-f0w": _cmd_build_f0w,
    "compose": _cmd_compose,
    "duflo": _cmd_duflo,
    "check": _cmd_check,
    "act": _cmd_act,
    "gt1": _cmd_gt1,
    "selftest": _cmd_selftest,
}


def run(cfg: CommandConfig) -> int:
    result, ok = _DISPATCH[cfg.command](cfg)
    _write(_render(result, cfg.fmt), cfg.out)
    return EXIT_OK if ok else EXIT_RESIDUAL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
        return run(cfg)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"kvforge: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except S.ParseError as exc:
        print(f"kvforge: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InputError as exc:
        print(f"kvforge: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # domain failures: non-KV input, Duflo color clash, failed verification
        print(f"kvforge: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL


if __name__ == "__main__":
    sys.exit(main())
