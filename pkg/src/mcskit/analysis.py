"""Diagnoses and explanations of inconsistent systems.

A diagnosis ``(d1, d2)`` removes the rules in ``d1`` and makes the rules
in ``d2`` unconditional; it is a diagnosis when the modified system has an
equilibrium.  An explanation ``(e1, e2)`` is a pair such that every
modification keeping all of ``e1`` and never forcing a rule of ``e2``
stays inconsistent.

The enumerations below work on rule *states*: under any modification a
rule is absent, kept as-is, or forced (unconditionally applicable; keeping
the original next to its unconditional copy adds nothing).  Consistency of
each state vector is computed at most once per call.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .core import DEFAULT_CAP, MCS, is_inconsistent, modify

ABSENT, KEPT, FORCED = 0, 1, 2


@dataclass(frozen=True)
class Diagnosis:
    d1: frozenset = frozenset()
    d2: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "d1", frozenset(self.d1))
        object.__setattr__(self, "d2", frozenset(self.d2))

    def __le__(self, other: Diagnosis) -> bool:
        return self.d1 <= other.d1 and self.d2 <= other.d2

    def __lt__(self, other: Diagnosis) -> bool:
        return self <= other and self != other

    @property
    def rules(self) -> frozenset:
        return self.d1 | self.d2

    def sort_key(self) -> tuple:
        return (len(self.d1) + len(self.d2), sorted(self.d1), sorted(self.d2))

    def as_dict(self) -> dict:
        return {"d1": sorted(self.d1), "d2": sorted(self.d2)}

    def __str__(self) -> str:
        return f"({{{','.join(sorted(self.d1))}}}, {{{','.join(sorted(self.d2))}}})"


@dataclass(frozen=True)
class Explanation:
    e1: frozenset = frozenset()
    e2: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "e1", frozenset(self.e1))
        object.__setattr__(self, "e2", frozenset(self.e2))

    def __le__(self, other: Explanation) -> bool:
        return self.e1 <= other.e1 and self.e2 <= other.e2

    def __lt__(self, other: Explanation) -> bool:
        return self <= other and self != other

    @property
    def rules(self) -> frozenset:
        return self.e1 | self.e2

    def sort_key(self) -> tuple:
        return (len(self.e1) + len(self.e2), sorted(self.e1), sorted(self.e2))

    def as_dict(self) -> dict:
        return {"e1": sorted(self.e1), "e2": sorted(self.e2)}

    def __str__(self) -> str:
        return f"({{{','.join(sorted(self.e1))}}}, {{{','.join(sorted(self.e2))}}})"


def _check_ids(mcs: MCS, *groups: Iterable[str]) -> None:
    known = set(mcs.rule_ids)
    for g in groups:
        unknown = set(g) - known
        if unknown:
            raise ValueError(f"unknown rule ids: {sorted(unknown)}")


# -- literal definitional checks ---------------------------------------------------------


def is_diagnosis(mcs: MCS, diagnosis: Diagnosis, cap: int = DEFAULT_CAP) -> bool:
    _check_ids(mcs, diagnosis.d1, diagnosis.d2)
    keep = set(mcs.rule_ids) - diagnosis.d1
    return not is_inconsistent(modify(mcs, keep, diagnosis.d2), cap)


def _powerset(items: Sequence[str]) -> Iterator[frozenset]:
    for k in range(len(items) + 1):
        for combo in itertools.combinations(items, k):
            yield frozenset(combo)


def is_explanation(mcs: MCS, explanation: Explanation, cap: int = DEFAULT_CAP) -> bool:
    """Check every admissible (R1, R2) pair for inconsistency of M[R1 ∪ heads(R2)]."""
    _check_ids(mcs, explanation.e1, explanation.e2)
    ids = mcs.rule_ids
    optional = [r for r in ids if r not in explanation.e1]
    forcible = [r for r in ids if r not in explanation.e2]
    for extra in _powerset(optional):
        r1 = explanation.e1 | extra
        for r2 in _powerset(forcible):
            if not is_inconsistent(modify(mcs, r1, r2), cap):
                return False
    return True


# -- state oracle -------------------------------------------------------------------------


def _state_system(mcs: MCS, state: tuple) -> MCS:
    ids = mcs.rule_ids
    keep = [r for r, s in zip(ids, state) if s == KEPT]
    force = [r for r, s in zip(ids, state) if s == FORCED]
    return modify(mcs, keep, force)


def _state_consistent(args) -> bool:
    mcs, state, cap = args
    return not is_inconsistent(_state_system(mcs, state), cap)


class _StateOracle:
    def __init__(self, mcs: MCS, cap: int, jobs: int = 1):
        self.mcs = mcs
        self.cap = cap
        self.jobs = jobs
        self.ids = mcs.rule_ids
        self.cache: dict[tuple, bool] = {}

    def consistent(self, state: tuple) -> bool:
        if state not in self.cache:
            self.cache[state] = _state_consistent((self.mcs, state, self.cap))
        return self.cache[state]

    def prefetch(self, states: Iterable[tuple]) -> None:
        pending = list(dict.fromkeys(s for s in states if s not in self.cache))
        if self.jobs <= 1 or len(pending) < 2:
            for s in pending:
                self.consistent(s)
            return
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:
            chunk = max(1, len(pending) // (4 * self.jobs))
            results = pool.map(_state_consistent, [(self.mcs, s, self.cap) for s in pending], chunksize=chunk)
            for s, ok in zip(pending, results):
                self.cache[s] = ok

    def diagnosis_state(self, d: Diagnosis) -> tuple:
        return tuple(FORCED if r in d.d2 else ABSENT if r in d.d1 else KEPT for r in self.ids)


def _pairs(ids: Sequence[str], size: int) -> Iterator[tuple[frozenset, frozenset]]:
    for k in range(size + 1):
        if k > len(ids) or size - k > len(ids):
            continue
        for first in itertools.combinations(ids, k):
            for second in itertools.combinations(ids, size - k):
                yield frozenset(first), frozenset(second)


# -- diagnoses ------------------------------------------------------------------------------


def _diagnoses(mcs: MCS, minimal: bool, cap: int, jobs: int, candidates: Sequence[str] | None) -> list[Diagnosis]:
    oracle = _StateOracle(mcs, cap, jobs)
    ids = tuple(mcs.rule_ids if candidates is None else candidates)
    _check_ids(mcs, ids)
    found: list[Diagnosis] = []
    for size in range(2 * len(ids) + 1):
        level = [Diagnosis(a, b) for a, b in _pairs(ids, size)]
        if minimal:
            level = [d for d in level if not any(f <= d for f in found)]
        oracle.prefetch(oracle.diagnosis_state(d) for d in level)
        found.extend(d for d in level if oracle.consistent(oracle.diagnosis_state(d)))
    return sorted(found, key=Diagnosis.sort_key)


def minimal_diagnoses(
    mcs: MCS, cap: int = DEFAULT_CAP, jobs: int = 1, candidates: Sequence[str] | None = None
) -> list[Diagnosis]:
    """Subset-minimal diagnoses (pointwise on the pair), ascending by size.

    ``candidates`` restricts the rules a diagnosis may mention.
    """
    return _diagnoses(mcs, True, cap, jobs, candidates)


def all_diagnoses(mcs: MCS, cap: int = DEFAULT_CAP, jobs: int = 1) -> list[Diagnosis]:
    return _diagnoses(mcs, False, cap, jobs, None)


# -- explanations -----------------------------------------------------------------------------


def _consistent_masks(oracle: _StateOracle) -> list[tuple[int, int]] | None:
    """(absent-mask, forced-mask) of every consistent state, or None when
    the unmodified system itself is consistent."""
    n = len(oracle.ids)
    if oracle.consistent((KEPT,) * n):
        return None
    states = list(itertools.product((ABSENT, KEPT, FORCED), repeat=n))
    oracle.prefetch(states)
    masks = []
    for s in states:
        if oracle.consistent(s):
            absent = sum(1 << j for j, v in enumerate(s) if v == ABSENT)
            forced = sum(1 << j for j, v in enumerate(s) if v == FORCED)
            masks.append((absent, forced))
    return masks


def _explanations(mcs: MCS, minimal: bool, cap: int, jobs: int) -> list[Explanation]:
    oracle = _StateOracle(mcs, cap, jobs)
    masks = _consistent_masks(oracle)
    if masks is None:
        return []
    ids = mcs.rule_ids
    bit = {r: 1 << j for j, r in enumerate(ids)}

    # A consistent state is reachable from an admissible (R1, R2) exactly
    # when it drops no rule of e1 and forces no rule of e2.
    def explains(e: Explanation) -> bool:
        m1 = sum(bit[r] for r in e.e1)
        m2 = sum(bit[r] for r in e.e2)
        return all(absent & m1 or forced & m2 for absent, forced in masks)

    found: list[Explanation] = []
    for size in range(2 * len(ids) + 1):
        for a, b in _pairs(ids, size):
            e = Explanation(a, b)
            if minimal and any(f <= e for f in found):
                continue
            if explains(e):
                found.append(e)
    return sorted(found, key=Explanation.sort_key)


def minimal_explanations(mcs: MCS, cap: int = DEFAULT_CAP, jobs: int = 1) -> list[Explanation]:
    return _explanations(mcs, True, cap, jobs)


def all_explanations(mcs: MCS, cap: int = DEFAULT_CAP, jobs: int = 1) -> list[Explanation]:
    return _explanations(mcs, False, cap, jobs)


def faulty_rule_sets(mcs: MCS, cap: int = DEFAULT_CAP, jobs: int = 1) -> tuple[frozenset, frozenset]:
    """Rules marked faulty by the minimal diagnoses and by the minimal explanations."""
    from_diagnoses = frozenset().union(*(d.rules for d in minimal_diagnoses(mcs, cap, jobs)))
    from_explanations = frozenset().union(*(e.rules for e in minimal_explanations(mcs, cap, jobs)))
    return from_diagnoses, from_explanations
