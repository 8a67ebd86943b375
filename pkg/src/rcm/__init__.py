"""Resilient coverage maximization: choose one trajectory per robot so that
coverage survives the worst-case loss of ``alpha`` robots."""

from rcm.attacks import (
    AttackResult,
    BudgetExceededError,
    greedy_attack_a1,
    greedy_attack_a2,
    optimal_attack,
    residual_coverage,
)
from rcm.coverage import CoverageCounter, coverage_value
from rcm.exact import ExactResult, export_ilp, solve_bruteforce
from rcm.model import (
    FeasibleSolution,
    Scenario,
    ScenarioParseError,
    ScenarioValidationError,
    build_scenario,
    load_scenario,
    serialize,
    tiny,
    validate_solution,
)
from rcm.solvers import SOLVER_NAMES, SolveReport, SolverSpec, parse_solver, solve

__version__ = "0.1.0"
