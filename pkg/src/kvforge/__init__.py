"""Exact truncated computations for Drinfeld associators and Kashiwara-Vergne solutions."""

from .chord import DKElem, dk_bracket, dk_compose, eval_t_group, eval_t_series, t_gen
from .derivations import TAut, TDer, divergence, jacobian, taut_compose, taut_mul, tder_bracket, tder_compose
from .equations import (
    AssociatorData,
    GT1Element,
    MoperadIsoData,
    Residual,
    extend_to_moperad,
    gt1_ratio,
    residual,
    solve_associator,
)
from .kv import KVSolution, build_F012, build_F0w, check_kv1, duflo_extract, gt1_to_kv, kv_associator, tau
from .lie import AssElem, CycElem, LieElem, ParenPerm, TruncationContext, bch, bracket

__version__ = "0.1.0"

__all__ = [
    "AssElem", "AssociatorData", "CycElem", "DKElem", "GT1Element", "KVSolution", "LieElem",
    "MoperadIsoData", "ParenPerm", "Residual", "TAut", "TDer", "TruncationContext", "bch",
    "bracket", "build_F012", "build_F0w", "check_kv1", "divergence", "dk_bracket", "dk_compose",
    "duflo_extract", "eval_t_group", "eval_t_series", "extend_to_moperad", "gt1_ratio",
    "gt1_to_kv", "jacobian", "kv_associator", "residual", "solve_associator", "t_gen", "tau",
    "taut_compose", "taut_mul", "tder_bracket", "tder_compose",
]
