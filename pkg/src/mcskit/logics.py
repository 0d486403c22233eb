"""Logic plugins: fact bases, clausal model logic and answer-set programs.

A plugin exposes ``wellformed(kb)`` and ``acc(kb)`` (the acceptable
belief sets) plus the small knowledge-base editing surface used by bridge
rules and managers: ``add_formulas``, ``remove_formulas`` and
``with_vocabulary``.  Every ``acc`` result is a frozenset of frozensets of
canonical atom strings.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol

from .core import Atom, CappedSearchError

CLAUSAL_ATOM_CAP = 20
ASP_ATOM_CAP = 200


class LogicPlugin(Protocol):
    name: str

    def wellformed(self, kb) -> bool: ...

    def acc(self, kb) -> frozenset: ...

    def add_formulas(self, kb, atoms: Iterable[Atom]): ...

    def remove_formulas(self, kb, atoms: Iterable[Atom]): ...

    def with_vocabulary(self, kb, atoms: Iterable[Atom]): ...

    def atoms(self, kb) -> frozenset: ...


# -- fact bases -----------------------------------------------------------------


@dataclass(frozen=True)
class FactsKB:
    facts: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "facts", frozenset(self.facts))


def facts_acc(kb: FactsKB) -> frozenset:
    return frozenset([kb.facts])


@dataclass(frozen=True)
class FactsLogic:
    name: str = "facts"

    def wellformed(self, kb) -> bool:
        return isinstance(kb, FactsKB)

    def acc(self, kb: FactsKB) -> frozenset:
        return facts_acc(kb)

    def add_formulas(self, kb: FactsKB, atoms) -> FactsKB:
        return FactsKB(kb.facts | frozenset(atoms))

    def remove_formulas(self, kb: FactsKB, atoms) -> FactsKB:
        return FactsKB(kb.facts - frozenset(atoms))

    def with_vocabulary(self, kb: FactsKB, atoms) -> FactsKB:
        return kb

    def atoms(self, kb: FactsKB) -> frozenset:
        return kb.facts


# -- clausal logic --------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Clause:
    """A disjunction of positive and negated atoms."""

    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pos", frozenset(self.pos))
        object.__setattr__(self, "neg", frozenset(self.neg))

    @property
    def atoms(self) -> frozenset:
        return self.pos | self.neg

    def satisfied_by(self, model: frozenset) -> bool:
        return bool(self.pos & model) or not self.neg <= model

    def sort_key(self) -> tuple:
        return tuple(sorted([(a, 0) for a in self.pos] + [(a, 1) for a in self.neg]))


@dataclass(frozen=True)
class ClausalKB:
    """Clauses over a signature.

    The signature is the clause atoms plus ``vocabulary``; the latter is
    where atoms arriving over bridge rules are registered, so that such
    additions never fall outside the model universe.
    """

    clauses: frozenset = frozenset()
    vocabulary: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "clauses", frozenset(self.clauses))
        object.__setattr__(self, "vocabulary", frozenset(self.vocabulary))

    @property
    def signature(self) -> frozenset:
        out = set(self.vocabulary)
        for c in self.clauses:
            out |= c.atoms
        return frozenset(out)


def clausal_acc(kb: ClausalKB) -> frozenset:
    """All subsets of the signature that satisfy every clause."""
    sig = sorted(kb.signature)
    if len(sig) > CLAUSAL_ATOM_CAP:
        raise CappedSearchError("clausal model enumeration", 2 ** len(sig), 2**CLAUSAL_ATOM_CAP)
    return frozenset(models(kb.clauses, sig))


@dataclass(frozen=True)
class ClausalLogic:
    name: str = "clausal"

    def wellformed(self, kb) -> bool:
        return isinstance(kb, ClausalKB) and all(isinstance(c, Clause) for c in kb.clauses)

    def acc(self, kb: ClausalKB) -> frozenset:
        return clausal_acc(kb)

    def add_formulas(self, kb: ClausalKB, atoms) -> ClausalKB:
        return ClausalKB(kb.clauses | {Clause({a}) for a in atoms}, kb.vocabulary)

    def remove_formulas(self, kb: ClausalKB, atoms) -> ClausalKB:
        units = {Clause({a}) for a in atoms}
        return ClausalKB(kb.clauses - units, kb.vocabulary | frozenset(atoms))

    def with_vocabulary(self, kb: ClausalKB, atoms) -> ClausalKB:
        return ClausalKB(kb.clauses, kb.vocabulary | frozenset(atoms))

    def atoms(self, kb: ClausalKB) -> frozenset:
        return kb.signature


def models(clauses: Iterable[Clause], atoms: Iterable[Atom]) -> Iterator[frozenset]:
    """Enumerate all models of ``clauses`` over ``atoms`` by DPLL with unit propagation."""
    clauses = list(clauses)
    atoms = list(atoms)

    def propagate(assign: dict) -> bool:
        changed = True
        while changed:
            changed = False
            for c in clauses:
                free = None
                nfree = 0
                sat = False
                for a in c.pos:
                    v = assign.get(a)
                    if v is True:
                        sat = True
                        break
                    if v is None:
                        nfree += 1
                        free = (a, True)
                if sat:
                    continue
                for a in c.neg:
                    v = assign.get(a)
                    if v is False:
                        sat = True
                        break
                    if v is None:
                        nfree += 1
                        free = (a, False)
                if sat:
                    continue
                if nfree == 0:
                    return False
                if nfree == 1:
                    assign[free[0]] = free[1]
                    changed = True
        return True

    def search(assign: dict) -> Iterator[frozenset]:
        if not propagate(assign):
            return
        for a in atoms:
            if a not in assign:
                break
        else:
            yield frozenset(a for a, v in assign.items() if v)
            return
        for value in (False, True):
            yield from search({**assign, a: value})

    # atoms outside the given universe are false
    start = {a: False for c in clauses for a in c.atoms if a not in set(atoms)}
    yield from search(start)


# -- answer-set programs --------------------------------------------------------------


@dataclass(frozen=True)
class AspRule:
    """``h1 | ... | hk :- p1, ..., not n1, ...``; an empty head is a constraint."""

    head: frozenset = frozenset()
    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "head", frozenset(self.head))
        object.__setattr__(self, "pos", frozenset(self.pos))
        object.__setattr__(self, "neg", frozenset(self.neg))

    @property
    def atoms(self) -> frozenset:
        return self.head | self.pos | self.neg

    @property
    def is_constraint(self) -> bool:
        return not self.head

    def __str__(self) -> str:
        head = " | ".join(sorted(self.head))
        body = ", ".join(sorted(self.pos) + [f"not {a}" for a in sorted(self.neg)])
        if not body:
            return f"{head}." if head else ":- ."
        return f"{head} :- {body}." if head else f":- {body}."


def fact(a: Atom) -> AspRule:
    return AspRule({a})


@dataclass(frozen=True)
class AspKB:
    rules: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rules", frozenset(self.rules))

    @property
    def atoms(self) -> frozenset:
        out: set = set()
        for r in self.rules:
            out |= r.atoms
        return frozenset(out)

    def __or__(self, other: AspKB) -> AspKB:
        return AspKB(self.rules | other.rules)

    def sorted_rules(self) -> list[AspRule]:
        return sorted(self.rules, key=str)


def reduct(program: AspKB, interpretation: Iterable[Atom]) -> AspKB:
    """Drop rules blocked by ``interpretation`` and strip default negation from the rest."""
    interp = frozenset(interpretation)
    return AspKB(AspRule(r.head, r.pos) for r in program.rules if not r.neg & interp)


def is_model(program: AspKB, interpretation: frozenset) -> bool:
    for r in program.rules:
        if r.pos <= interpretation and not r.neg & interpretation and not r.head & interpretation:
            return False
    return True


def least_model(program: AspKB) -> frozenset:
    """Least model of the definite rules (constraints and negation ignored)."""
    definite = [r for r in program.rules if len(r.head) == 1]
    model: set = set()
    changed = True
    while changed:
        changed = False
        for r in definite:
            if r.pos <= model and not r.head <= model:
                model |= r.head
                changed = True
    return frozenset(model)


def is_answer_set(program: AspKB, interpretation: Iterable[Atom]) -> bool:
    interp = frozenset(interpretation)
    red = reduct(program, interp)
    if not is_model(red, interp):
        return False
    if all(len(r.head) <= 1 for r in red.rules):
        # the least model lies below every model, and positive constraints
        # survive shrinking, so minimality means reaching the fixpoint
        return least_model(red) == interp
    return not _has_smaller_model(red, interp)


def _has_smaller_model(positive: AspKB, interp: frozenset) -> bool:
    clauses = []
    for r in positive.rules:
        if r.pos <= interp:
            clauses.append(Clause(r.head & interp, r.pos))
    clauses.append(Clause((), interp))
    return next(models(clauses, sorted(interp)), None) is not None


@functools.lru_cache(maxsize=1 << 16)
def asp_acc(program: AspKB) -> frozenset:
    """All answer sets of ``program``.

    Candidates come from a backtracking search over the program's atoms
    that propagates rule satisfaction and support (a true atom needs a rule
    with a non-falsified body in which it is the only true head atom).
    Each complete candidate is confirmed with :func:`is_answer_set`.
    """
    universe = sorted(program.atoms)
    if len(universe) > ASP_ATOM_CAP:
        raise CappedSearchError("answer-set search", len(universe), ASP_ATOM_CAP)
    rules = sorted(program.rules, key=str)
    supporters: dict[Atom, list[AspRule]] = {a: [] for a in universe}
    for r in rules:
        for a in r.head:
            supporters[a].append(r)
    found: set = set()

    def propagate(assign: dict) -> bool:
        changed = True
        while changed:
            changed = False
            for r in rules:
                nfree = 0
                free = None
                sat = False
                for a in r.head:
                    v = assign.get(a)
                    if v is True:
                        sat = True
                        break
                    if v is None:
                        nfree += 1
                        free = (a, True)
                if sat:
                    continue
                for a in r.pos:
                    v = assign.get(a)
                    if v is False:
                        sat = True
                        break
                    if v is None:
                        nfree += 1
                        free = (a, False)
                if sat:
                    continue
                for a in r.neg:
                    v = assign.get(a)
                    if v is True:
                        sat = True
                        break
                    if v is None:
                        nfree += 1
                        free = (a, True)
                if sat:
                    continue
                if nfree == 0:
                    return False
                if nfree == 1:
                    assign[free[0]] = free[1]
                    changed = True
            for a in universe:
                if assign.get(a) is False:
                    continue
                if not any(_may_support(r, a, assign) for r in supporters[a]):
                    if assign.get(a) is True:
                        return False
                    assign[a] = False
                    changed = True
        return True

    def search(assign: dict) -> None:
        if not propagate(assign):
            return
        for a in universe:
            if a not in assign:
                break
        else:
            interp = frozenset(a for a, v in assign.items() if v)
            if is_answer_set(program, interp):
                found.add(interp)
            return
        for value in (False, True):
            search({**assign, a: value})

    search({})
    return frozenset(found)


def _may_support(rule: AspRule, a: Atom, assign: dict) -> bool:
    for b in rule.pos:
        if assign.get(b) is False:
            return False
    for b in rule.neg:
        if assign.get(b) is True:
            return False
    for b in rule.head:
        if b != a and assign.get(b) is True:
            return False
    return True


@dataclass(frozen=True)
class AspLogic:
    name: str = "asp"

    def wellformed(self, kb) -> bool:
        return isinstance(kb, AspKB) and all(isinstance(r, AspRule) for r in kb.rules)

    def acc(self, kb: AspKB) -> frozenset:
        return asp_acc(kb)

    def add_formulas(self, kb: AspKB, atoms) -> AspKB:
        return AspKB(kb.rules | {fact(a) for a in atoms})

    def remove_formulas(self, kb: AspKB, atoms) -> AspKB:
        return AspKB(kb.rules - {fact(a) for a in atoms})

    def with_vocabulary(self, kb: AspKB, atoms) -> AspKB:
        return kb

    def atoms(self, kb: AspKB) -> frozenset:
        return kb.atoms


FACTS = FactsLogic()
CLAUSAL = ClausalLogic()
ASP = AspLogic()

LOGICS = {lg.name: lg for lg in (FACTS, CLAUSAL, ASP)}

_KB_LOGIC = {FactsKB: FACTS, ClausalKB: CLAUSAL, AspKB: ASP}


def logic_for(kb) -> LogicPlugin:
    try:
        return _KB_LOGIC[type(kb)]
    except KeyError:
        raise TypeError(f"no logic plugin for {type(kb).__name__}") from None
