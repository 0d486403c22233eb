"""Multi-context systems: equilibria, diagnoses, explanations and managed contexts."""

from .analysis import (
    Diagnosis,
    Explanation,
    all_diagnoses,
    all_explanations,
    faulty_rule_sets,
    is_diagnosis,
    is_explanation,
    minimal_diagnoses,
    minimal_explanations,
)
from .core import (
    DEFAULT_CAP,
    MCS,
    BeliefLiteral,
    BeliefState,
    BridgeRule,
    CappedSearchError,
    Context,
    OpCommand,
    enumerate_equilibria,
    is_consistent,
    is_equilibrium,
    is_inconsistent,
    modify,
    validate,
)
from .logics import ASP, CLAUSAL, FACTS, AspKB, AspRule, ClausalKB, Clause, FactsKB, asp_acc
from .managed import (
    AddDeleteManager,
    AddManager,
    CycleClass,
    GuardedReviseManager,
    classify_cycles,
    dependency_graph,
    enumerate_equilibria_managed,
    totally_coherent,
)
from .meta import (
    ObserverProgram,
    PreferenceProgram,
    build_observed_mcs,
    filter_diagnoses,
    observed_diagnoses,
    preferred_diagnoses,
)
from .parser import ParseError, ParseFailure, parse_mcs, parse_program, serialize_mcs, serialize_program

__version__ = "0.1.0"
