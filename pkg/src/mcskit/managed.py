"""Managed systems: op-command heads, context managers and cycle analysis."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import networkx as nx

from .core import (
    DEFAULT_CAP,
    MCS,
    Atom,
    BeliefState,
    CappedSearchError,
    OpCommand,
    _acceptable,
    _subsets,
    enumerate_equilibria,
    head_text,
    is_equilibrium,
    validate,
    vocabulary,
)
from .logics import FactsKB, logic_for


class UnsupportedOpError(ValueError):
    def __init__(self, manager: str, op: OpCommand):
        super().__init__(f"manager {manager!r} does not support {op}")
        self.manager = manager
        self.op = op


def _check_supported(manager, ops: Iterable[OpCommand]) -> None:
    for op in sorted(ops):
        if op.op not in manager.supported:
            raise UnsupportedOpError(manager.name, op)


@dataclass(frozen=True)
class AddManager:
    name: str = "add"
    supported: frozenset = frozenset({"add"})

    def apply(self, ops: frozenset, kb) -> tuple:
        _check_supported(self, ops)
        return (logic_for(kb).add_formulas(kb, {o.formula for o in ops}),)


@dataclass(frozen=True)
class AddDeleteManager:
    """Deletes first, then adds, so ``add`` wins when both name one formula."""

    name: str = "add_delete"
    supported: frozenset = frozenset({"add", "del"})

    def apply(self, ops: frozenset, kb) -> tuple:
        _check_supported(self, ops)
        logic = logic_for(kb)
        kb = logic.remove_formulas(kb, {o.formula for o in ops if o.op == "del"})
        return (logic.add_formulas(kb, {o.formula for o in ops if o.op == "add"}),)


@dataclass(frozen=True)
class GuardedReviseManager:
    """Revision of fact bases against declared exclusion pairs.

    Each ``add(s)``/``revise(s)`` inserts ``s`` and evicts every fact
    declared exclusive with ``s``.  Formulas are processed in canonical
    order, so a later formula can evict an earlier one.
    """

    exclusions: frozenset = frozenset()
    name: str = "guarded_revise"
    supported: frozenset = frozenset({"add", "revise"})

    def __post_init__(self):
        object.__setattr__(self, "exclusions", frozenset(frozenset(p) for p in self.exclusions))
        for pair in self.exclusions:
            if len(pair) != 2:
                raise ValueError(f"exclusion pair needs two distinct atoms, got {sorted(pair)}")

    def excluded_with(self, a: Atom) -> frozenset:
        return frozenset(b for pair in self.exclusions if a in pair for b in pair if b != a)

    def apply(self, ops: frozenset, kb) -> tuple:
        _check_supported(self, ops)
        if not isinstance(kb, FactsKB):
            raise TypeError("guarded_revise manages fact bases only")
        facts = set(kb.facts)
        for a in sorted({o.formula for o in ops}):
            facts -= self.excluded_with(a)
            facts.add(a)
        return (FactsKB(facts),)


MANAGERS = {"add": AddManager, "add_delete": AddDeleteManager, "guarded_revise": GuardedReviseManager}


def make_manager(name: str, exclusions: Iterable = ()):
    if name == "guarded_revise":
        return GuardedReviseManager(frozenset(frozenset(p) for p in exclusions))
    if exclusions:
        raise ValueError(f"manager {name!r} takes no exclusion pairs")
    return MANAGERS[name]()


def mng_apply(manager, ops: Iterable[OpCommand], kb) -> tuple:
    return manager.apply(frozenset(ops), kb)


# -- managed semantics -------------------------------------------------------------------


def _check_managed(mcs: MCS) -> None:
    problems = validate(mcs)
    if problems:
        raise ValueError("; ".join(str(p) for p in problems))


def enumerate_equilibria_managed(mcs: MCS, cap: int = DEFAULT_CAP) -> list[BeliefState]:
    """All S where every S_i is acceptable for some kb' the manager of
    context i produces from the op-commands applicable under S."""
    _check_managed(mcs)
    return enumerate_equilibria(mcs, cap)


def is_equilibrium_managed(mcs: MCS, state: BeliefState) -> bool:
    _check_managed(mcs)
    return is_equilibrium(mcs, state)


def totally_coherent(mcs: MCS, cid: str, cap: int = DEFAULT_CAP) -> bool:
    """True iff every subset of the op-heads into ``cid`` leaves some acceptable belief set."""
    ctx = mcs.context(cid)
    heads = sorted({r.head for r in mcs.rules_into(cid)}, key=head_text)
    if 2 ** len(heads) > cap:
        raise CappedSearchError("coherence check", 2 ** len(heads), cap)
    vocab = vocabulary(mcs, cid)
    return all(_acceptable(ctx, frozenset(ops), vocab) for ops in _subsets(heads))


# -- dependency graph ---------------------------------------------------------------------


class Edge(NamedTuple):
    source: str
    target: str
    negative: bool


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]


class CycleClass(str, enum.Enum):
    ACYCLIC = "acyclic"
    EVEN_ONLY = "cyclic_even_only"
    WITH_ODD = "cyclic_with_odd"

    def __str__(self) -> str:
        return self.value


def dependency_graph(mcs: MCS) -> DependencyGraph:
    """Edge c -> k whenever a rule into k reads a belief at c; negative under ``not``."""
    order = {cid: i for i, cid in enumerate(mcs.context_ids)}
    edges = {Edge(lit.context, r.head_context, lit.negated) for r in mcs.rules for lit in r.body}
    ranked = sorted(edges, key=lambda e: (order[e.source], order[e.target], e.negative))
    return DependencyGraph(mcs.context_ids, tuple(ranked))


def classify_cycles(graph: DependencyGraph, cap: int = 10_000) -> CycleClass:
    polarity: dict[tuple[str, str], set[bool]] = {}
    for e in graph.edges:
        polarity.setdefault((e.source, e.target), set()).add(e.negative)
    g = nx.DiGraph()
    g.add_nodes_from(graph.nodes)
    g.add_edges_from(polarity)
    cyclic = False
    for count, cycle in enumerate(nx.simple_cycles(g), start=1):
        if count > cap:
            raise CappedSearchError("cycle enumeration", count, cap)
        cyclic = True
        steps = list(zip(cycle, cycle[1:] + cycle[:1]))
        # a step with both polarities lets the cycle take either parity
        if any(len(polarity[s]) == 2 for s in steps):
            return CycleClass.WITH_ODD
        if sum(True in polarity[s] for s in steps) % 2:
            return CycleClass.WITH_ODD
    return CycleClass.EVEN_ONLY if cyclic else CycleClass.ACYCLIC
