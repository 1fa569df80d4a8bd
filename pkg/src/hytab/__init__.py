"""Satisfiability prover for graded hybrid logic with global modalities,
role hierarchies and reflexive/transitive roles, based on a cumulative
tableau calculus with pattern-based blocking."""

from .syntax import (
    Prop, NomTest, Neg, Conj, Disj, Dia, Box, ExistsGlobal, ForallGlobal,
    Problem, ParseError, ValidationError,
    parse_problem, parse_expr, print_expr, print_problem,
    to_nnf, is_nnf, simple_roles,
)
from .branch import Branch, Label, Edge, Eq, Neq, FALSUM
from .search import SearchConfig, DecisionResult, decide
from .model import (
    Interpretation, evaluate, check_model,
    complete_to_pre_evident, evidence_closure, extract_model, model_to_json,
)
from .oracle import OracleVerdict, OracleBudgetError, brute_force_sat, equivalent_exprs

__all__ = [
    "Prop", "NomTest", "Neg", "Conj", "Disj", "Dia", "Box",
    "ExistsGlobal", "ForallGlobal",
    "Problem", "ParseError", "ValidationError",
    "parse_problem", "parse_expr", "print_expr", "print_problem",
    "to_nnf", "is_nnf", "simple_roles",
    "Branch", "Label", "Edge", "Eq", "Neq", "FALSUM",
    "SearchConfig", "DecisionResult", "decide",
    "Interpretation", "evaluate", "check_model",
    "complete_to_pre_evident", "evidence_closure", "extract_model",
    "model_to_json",
    "OracleVerdict", "OracleBudgetError", "brute_force_sat", "equivalent_exprs",
]
