"""Filtering and preference selection of diagnoses through observer programs.

An observer is an answer-set program over the input predicates ``rule/1``,
``d1/1`` and ``d2/1``; it vetoes a diagnosis by having no answer set once
the diagnosis is added as facts.  A preference program compares two
diagnoses given as ``d1a/1, d2a/1`` and ``d1b/1, d2b/1`` and derives
``better_a`` when the first is strictly better.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .analysis import Diagnosis, minimal_diagnoses
from .core import DEFAULT_CAP, MCS, BeliefLiteral, BridgeRule, Context, predicate
from .logics import ASP, AspKB, AspRule, asp_acc, fact

OBSERVER_INPUTS = frozenset({"rule", "d1", "d2"})
PREFERENCE_INPUTS = frozenset({"rule", "d1a", "d2a", "d1b", "d2b"})
OBSERVER_CONTEXT = "ob"
# auxiliary predicates of the generated observer context
_GUESS, _SKIP, _HEAD = "obs_guess", "obs_skip", "obs_head"


def _defined_inputs(program: AspKB, inputs: frozenset) -> list[str]:
    return sorted({a for r in program.rules for a in r.head if predicate(a) in inputs})


@dataclass(frozen=True)
class ObserverProgram:
    program: AspKB = AspKB()

    def __post_init__(self):
        bad = _defined_inputs(self.program, OBSERVER_INPUTS)
        if bad:
            raise ValueError(f"observer program must not define input atoms {bad}")
        aux = sorted({a for a in self.program.atoms if predicate(a).startswith("obs_")})
        if aux:
            raise ValueError(f"predicates with prefix 'obs_' are reserved, found {aux}")


@dataclass(frozen=True)
class PreferenceProgram:
    program: AspKB = AspKB()

    def __post_init__(self):
        bad = _defined_inputs(self.program, PREFERENCE_INPUTS)
        if bad:
            raise ValueError(f"preference program must not define input atoms {bad}")


def _scope(mcs: MCS, scope: Iterable[str] | None) -> tuple[str, ...]:
    if scope is None:
        return mcs.rule_ids
    scope = set(scope)
    unknown = scope - set(mcs.rule_ids)
    if unknown:
        raise ValueError(f"unknown rule ids in observer scope: {sorted(unknown)}")
    return tuple(r for r in mcs.rule_ids if r in scope)


def encode_diagnosis(diagnosis: Diagnosis, mcs: MCS, scope: Iterable[str] | None = None) -> frozenset:
    """``rule(r)`` for every observed rule, plus ``d1(r)``/``d2(r)`` membership facts."""
    seen = _scope(mcs, scope)
    out = {f"rule({r})" for r in seen}
    out |= {f"d1({r})" for r in seen if r in diagnosis.d1}
    out |= {f"d2({r})" for r in seen if r in diagnosis.d2}
    return frozenset(out)


def observer_accepts(
    observer: ObserverProgram, diagnosis: Diagnosis, mcs: MCS, scope: Iterable[str] | None = None
) -> bool:
    facts = AspKB(fact(a) for a in encode_diagnosis(diagnosis, mcs, scope))
    return bool(asp_acc(observer.program | facts))


def filter_diagnoses(
    mcs: MCS,
    observer: ObserverProgram,
    scope: Iterable[str] | None = None,
    cap: int = DEFAULT_CAP,
    jobs: int = 1,
) -> list[Diagnosis]:
    """Minimal diagnoses the observer does not veto, in canonical order."""
    return [d for d in minimal_diagnoses(mcs, cap, jobs) if observer_accepts(observer, d, mcs, scope)]


# -- observed system -----------------------------------------------------------------------


def _observer_rules(rid: str) -> list[AspRule]:
    guess, skip, head = f"{_GUESS}({rid})", f"{_SKIP}({rid})", f"{_HEAD}({rid})"
    return [
        AspRule({guess}, neg={skip}),
        AspRule({skip}, neg={guess}),
        # probing with the guess on: no head means the rule was removed
        AspRule({f"d1({rid})"}, pos={guess}, neg={head}),
        # probing with the guess off: a head means the rule was forced
        AspRule({f"d2({rid})"}, pos={skip, head}),
        fact(f"rule({rid})"),
    ]


def build_observed_mcs(mcs: MCS, observer: ObserverProgram, scope: Iterable[str] | None = None) -> MCS:
    """Add an observer context ``ob`` that sees which diagnosis is applied.

    Every observed rule ``r: (k:s) <- B`` keeps its id but becomes a probe
    ``r: (ob:obs_head(r)) <- (ob:obs_guess(r))``.  The observer guesses the
    probe's body, which reveals whether ``r`` was removed or forced, and
    derives ``d1(r)``/``d2(r)``.  Two forwarding rules restore the original
    effect::

        (k:s) <- (ob:d2(r)).
        (k:s) <- B, not (ob:d1(r)).

    Unobserved rules are copied unchanged.  A diagnosis of the result that
    only mentions original rule ids corresponds to the same diagnosis of
    ``mcs`` whenever the observer accepts it.
    """
    if OBSERVER_CONTEXT in mcs.context_ids:
        raise ValueError(f"context id {OBSERVER_CONTEXT!r} is already in use")
    observed = _scope(mcs, scope)
    taken = set(mcs.rule_ids)

    def fresh(base: str) -> str:
        new = base
        while new in taken:
            new += "_"
        taken.add(new)
        return new

    program_rules = set(observer.program.rules)
    rules: list[BridgeRule] = []
    forwards: list[BridgeRule] = []
    for r in mcs.rules:
        if r.id not in observed:
            rules.append(r)
            continue
        program_rules.update(_observer_rules(r.id))
        rules.append(
            BridgeRule(
                r.id,
                OBSERVER_CONTEXT,
                f"{_HEAD}({r.id})",
                (BeliefLiteral(OBSERVER_CONTEXT, f"{_GUESS}({r.id})"),),
            )
        )
        forwards.append(
            BridgeRule(
                fresh(f"{r.id}__forced"),
                r.head_context,
                r.head,
                (BeliefLiteral(OBSERVER_CONTEXT, f"d2({r.id})"),),
            )
        )
        forwards.append(
            BridgeRule(
                fresh(f"{r.id}__kept"),
                r.head_context,
                r.head,
                r.body + (BeliefLiteral(OBSERVER_CONTEXT, f"d1({r.id})", negated=True),),
            )
        )
    ob = Context(OBSERVER_CONTEXT, ASP, AspKB(program_rules))
    return MCS(mcs.contexts + (ob,), tuple(rules + forwards))


def observed_diagnoses(
    mcs: MCS,
    observer: ObserverProgram,
    scope: Iterable[str] | None = None,
    cap: int = DEFAULT_CAP,
    jobs: int = 1,
) -> list[Diagnosis]:
    """Minimal diagnoses of the observed system that touch only rules of ``mcs``.

    Rules keep their ids in the observed system, so the projection back to
    ``mcs`` is the identity.
    """
    observed = build_observed_mcs(mcs, observer, scope)
    return minimal_diagnoses(observed, cap, jobs, candidates=mcs.rule_ids)


# -- preferences ------------------------------------------------------------------------------


def _comparison_facts(a: Diagnosis, b: Diagnosis, mcs: MCS) -> AspKB:
    atoms = {f"rule({r})" for r in mcs.rule_ids}
    atoms |= {f"d1a({r})" for r in a.d1} | {f"d2a({r})" for r in a.d2}
    atoms |= {f"d1b({r})" for r in b.d1} | {f"d2b({r})" for r in b.d2}
    return AspKB(fact(x) for x in atoms)


def strictly_better(preference: PreferenceProgram, a: Diagnosis, b: Diagnosis, mcs: MCS) -> bool:
    """``better_a`` in every answer set of the comparison of ``a`` against ``b`` (and at least one exists)."""
    answer_sets = asp_acc(preference.program | _comparison_facts(a, b, mcs))
    return bool(answer_sets) and all("better_a" in s for s in answer_sets)


def preferred_diagnoses(
    mcs: MCS,
    preference: PreferenceProgram,
    observer: ObserverProgram | None = None,
    cap: int = DEFAULT_CAP,
    jobs: int = 1,
) -> list[Diagnosis]:
    if observer is None:
        candidates = minimal_diagnoses(mcs, cap, jobs)
    else:
        candidates = filter_diagnoses(mcs, observer, cap=cap, jobs=jobs)
    return select_preferred(mcs, preference, candidates)


def select_preferred(mcs: MCS, preference: PreferenceProgram, candidates: Sequence[Diagnosis]) -> list[Diagnosis]:
    return [
        d
        for d in candidates
        if not any(other != d and strictly_better(preference, other, d, mcs) for other in candidates)
    ]
