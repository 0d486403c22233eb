"""Multi-context system data model and equilibrium semantics.

A system is an ordered tuple of contexts plus a global tuple of bridge
rules.  Each context pairs a knowledge base with a logic plugin (see
:mod:`mcskit.logics`) and optionally a manager (see :mod:`mcskit.managed`).
Everything here is immutable; all operations are pure functions.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union

DEFAULT_CAP = 2**20

NAME_PATTERN = r"[A-Za-z0-9_]+"
_ATOM_RE = re.compile(rf"{NAME_PATTERN}(?:\({NAME_PATTERN}(?:,{NAME_PATTERN})*\))?")
_ID_RE = re.compile(NAME_PATTERN)
_WS_RE = re.compile(r"\s+")

Atom = str
BeliefSet = frozenset  # frozenset[Atom]


def atom(text: str) -> Atom:
    """Return the canonical text of a ground atom.

    Whitespace is stripped; the result must look like ``name`` or
    ``name(arg,...,arg)`` with plain name tokens as arguments.
    """
    canon = _WS_RE.sub("", text)
    if not _ATOM_RE.fullmatch(canon):
        raise ValueError(f"malformed atom {text!r}")
    return canon


def is_identifier(text: str) -> bool:
    return bool(_ID_RE.fullmatch(text))


def predicate(a: Atom) -> str:
    return a.split("(", 1)[0]


class CappedSearchError(RuntimeError):
    """A search space exceeded its configured ceiling."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: search space of {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


OPS = ("add", "del", "revise")


@dataclass(frozen=True, order=True)
class OpCommand:
    op: str
    formula: Atom

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown operation {self.op!r}")

    def __str__(self) -> str:
        return f"{self.op}({self.formula})"


Head = Union[Atom, OpCommand]


def head_text(head: Head) -> str:
    return str(head)


def head_formula(head: Head) -> Atom:
    return head.formula if isinstance(head, OpCommand) else head


@dataclass(frozen=True)
class BeliefLiteral:
    context: str
    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return f"{'not ' if self.negated else ''}{self.context}::{self.atom}"


@dataclass(frozen=True)
class BridgeRule:
    id: str
    head_context: str
    head: Head
    body: tuple[BeliefLiteral, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))

    @property
    def is_op(self) -> bool:
        return isinstance(self.head, OpCommand)

    def content(self) -> tuple:
        """The rule without its id, for comparisons up to renaming."""
        return (self.head_context, head_text(self.head), self.body)

    def __str__(self) -> str:
        body = ", ".join(str(lit) for lit in self.body)
        return f"{self.id}: {self.head_context}::{head_text(self.head)} <- {body}."


@dataclass(frozen=True)
class Context:
    id: str
    logic: Any
    kb: Any
    manager: Any = None


@dataclass(frozen=True)
class MCS:
    contexts: tuple[Context, ...] = ()
    rules: tuple[BridgeRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def context_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.contexts)

    @property
    def rule_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.rules)

    def context(self, cid: str) -> Context:
        for c in self.contexts:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def index(self, cid: str) -> int:
        return self.context_ids.index(cid)

    def rule(self, rid: str) -> BridgeRule:
        for r in self.rules:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def rules_into(self, cid: str) -> tuple[BridgeRule, ...]:
        return tuple(r for r in self.rules if r.head_context == cid)

    def with_rules(self, rules: Iterable[BridgeRule]) -> MCS:
        return MCS(self.contexts, tuple(rules))

    @property
    def is_managed(self) -> bool:
        return any(c.manager is not None for c in self.contexts) or any(
            r.is_op for r in self.rules
        )


@dataclass(frozen=True)
class BeliefState:
    """One belief set per context, in context order."""

    ids: tuple[str, ...]
    sets: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))
        if len(self.ids) != len(self.sets):
            raise ValueError("belief state needs exactly one belief set per context")

    @classmethod
    def of(cls, mcs: MCS, sets: Sequence[Iterable[Atom]] | Mapping[str, Iterable[Atom]]) -> BeliefState:
        ids = mcs.context_ids
        if isinstance(sets, Mapping):
            return cls(ids, tuple(frozenset(sets.get(cid, ())) for cid in ids))
        sets = tuple(sets)
        if len(sets) != len(ids):
            raise ValueError(f"expected {len(ids)} belief sets, got {len(sets)}")
        return cls(ids, sets)

    def __getitem__(self, cid: str) -> frozenset:
        try:
            return self.sets[self.ids.index(cid)]
        except ValueError:
            raise KeyError(cid) from None

    def __iter__(self):
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def sort_key(self) -> tuple:
        return tuple(tuple(sorted(s)) for s in self.sets)

    def as_dict(self) -> dict[str, list[Atom]]:
        return {cid: sorted(s) for cid, s in zip(self.ids, self.sets)}

    def __str__(self) -> str:
        return " ".join(f"{cid}={{{','.join(sorted(s))}}}" for cid, s in zip(self.ids, self.sets))


# -- validation ---------------------------------------------------------------

_COMPAT_SUBSET_LIMIT = 12


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def validate(mcs: MCS) -> list[Violation]:
    """List every referential or compatibility problem; empty means valid."""
    report: list[Violation] = []
    seen: set[str] = set()
    for c in mcs.contexts:
        if not is_identifier(c.id):
            report.append(Violation("syntax", c.id, f"context id {c.id!r} is not a name token"))
        if c.id in seen:
            report.append(Violation("duplicate-id", c.id, f"duplicate context id {c.id!r}"))
        seen.add(c.id)
        if not c.logic.wellformed(c.kb):
            report.append(
                Violation("malformed-kb", c.id, f"knowledge base of {c.id!r} is not wellformed for {c.logic.name}")
            )
    seen_rules: set[str] = set()
    for r in mcs.rules:
        if not is_identifier(r.id):
            report.append(Violation("syntax", r.id, f"rule id {r.id!r} is not a name token"))
        if r.id in seen_rules:
            report.append(Violation("duplicate-id", r.id, f"duplicate rule id {r.id!r}"))
        seen_rules.add(r.id)
        if r.head_context not in seen:
            report.append(
                Violation("dangling-reference", r.id, f"rule {r.id!r} targets unknown context {r.head_context!r}")
            )
        for lit in r.body:
            if lit.context not in seen:
                report.append(
                    Violation("dangling-reference", r.id, f"rule {r.id!r} reads unknown context {lit.context!r}")
                )
        for a in [head_formula(r.head)] + [lit.atom for lit in r.body]:
            try:
                ok = atom(a) == a
            except ValueError:
                ok = False
            if not ok:
                report.append(Violation("syntax", r.id, f"rule {r.id!r} uses non-canonical atom {a!r}"))
        if r.head_context in seen and r.is_op:
            target = mcs.context(r.head_context)
            if target.manager is None:
                report.append(
                    Violation(
                        "mode-mismatch", r.id, f"rule {r.id!r} sends {r.head} to unmanaged context {r.head_context!r}"
                    )
                )
            elif r.head.op not in target.manager.supported:
                report.append(
                    Violation(
                        "mode-mismatch",
                        r.id,
                        f"manager {target.manager.name!r} of {r.head_context!r} does not support {r.head.op!r}",
                    )
                )
    if report:
        return report
    for c in mcs.contexts:
        if c.manager is not None:
            continue
        heads = sorted({r.head for r in mcs.rules_into(c.id)}, key=head_text)
        kb = c.logic.with_vocabulary(c.kb, frozenset(heads))
        if len(heads) <= _COMPAT_SUBSET_LIMIT:
            subsets: Iterable = _subsets(heads)
        else:
            # shipped logics are closed under adding atoms, so the union suffices
            subsets = [tuple(heads)]
        for h in subsets:
            try:
                ok = c.logic.wellformed(c.logic.add_formulas(kb, frozenset(h)))
            except (TypeError, ValueError):
                ok = False
            if not ok:
                report.append(
                    Violation("incompatible-head", c.id, f"heads {sorted(h)} are not compatible with {c.id!r}")
                )
                break
    return report


def _subsets(items: Sequence) -> Iterator[tuple]:
    """All subsets, by ascending size then in the order of ``items``."""
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


# -- applicability --------------------------------------------------------------


def rule_applicable(rule: BridgeRule, state: BeliefState) -> bool:
    for lit in rule.body:
        if lit.context not in state.ids:
            raise ValueError(f"belief state has no context {lit.context!r}")
        if (lit.atom in state[lit.context]) == lit.negated:
            return False
    return True


def app_heads(mcs: MCS, cid: str, state: BeliefState) -> frozenset:
    """Heads of all rules into ``cid`` that are applicable in ``state``."""
    return frozenset(r.head for r in mcs.rules_into(cid) if rule_applicable(r, state))


def vocabulary(mcs: MCS, cid: str) -> frozenset:
    return frozenset(head_formula(r.head) for r in mcs.rules_into(cid))


def acceptable(mcs: MCS, cid: str, heads: Iterable[Head]) -> frozenset:
    """Belief sets acceptable at ``cid`` once ``heads`` have been applied.

    Plain contexts read the heads as additions to the knowledge base.
    Managed contexts hand them to the manager as op-commands (plain atoms
    count as ``add``); the union over all resulting knowledge bases is
    returned.
    """
    return _acceptable(mcs.context(cid), frozenset(heads), vocabulary(mcs, cid))


def _acceptable(ctx: Context, heads: frozenset, vocab: frozenset) -> frozenset:
    kb = ctx.logic.with_vocabulary(ctx.kb, vocab)
    if ctx.manager is None:
        if any(isinstance(h, OpCommand) for h in heads):
            raise ValueError(f"op-command sent to unmanaged context {ctx.id!r}")
        return ctx.logic.acc(ctx.logic.add_formulas(kb, heads))
    ops = frozenset(h if isinstance(h, OpCommand) else OpCommand("add", h) for h in heads)
    out: set = set()
    for kb2 in ctx.manager.apply(ops, kb):
        if not ctx.logic.wellformed(kb2):
            raise ValueError(f"manager {ctx.manager.name!r} of {ctx.id!r} produced a malformed knowledge base")
        out |= ctx.logic.acc(kb2)
    return frozenset(out)


def is_equilibrium(mcs: MCS, state: BeliefState) -> bool:
    if tuple(state.ids) != mcs.context_ids:
        raise ValueError("belief state does not match the contexts of the system")
    return all(
        state[c.id] in acceptable(mcs, c.id, app_heads(mcs, c.id, state)) for c in mcs.contexts
    )


# -- equilibrium search -------------------------------------------------------------


def search_space(mcs: MCS) -> int:
    """Number of head-set combinations the guess-and-check search may visit."""
    return math.prod(2 ** len({r.head for r in mcs.rules_into(cid)}) for cid in mcs.context_ids)


def iter_equilibria(mcs: MCS, cap: int = DEFAULT_CAP) -> Iterator[BeliefState]:
    """Yield equilibria (unordered, without duplicates).

    Guess-and-check: for each context guess the set of heads that will be
    applicable, pick an acceptable belief set for the knowledge base
    extended by that guess, and keep the state when the guesses coincide
    with the heads actually applicable.  Rules are checked as soon as every
    context they mention has been assigned, which prunes the search
    without changing its result.
    """
    ids = mcs.context_ids
    n = len(ids)
    pos = {cid: i for i, cid in enumerate(ids)}
    space = search_space(mcs)
    if space > cap:
        raise CappedSearchError("equilibrium search", space, cap)

    compiled = []
    for r in mcs.rules:
        k = pos[r.head_context]
        lits = tuple((pos[lit.context], lit.atom, lit.negated) for lit in r.body)
        ready = max([k] + [c for c, _, _ in lits])
        compiled.append((k, r.head, lits, ready))
    checks_at: list[list] = [[] for _ in range(n)]
    for rule in compiled:
        checks_at[rule[3]].append(rule)
    by_head: dict[tuple, list] = {}
    for rule in compiled:
        by_head.setdefault((rule[0], rule[1]), []).append(rule)
    justify_at: list[list] = [[] for _ in range(n)]
    for (k, h), rules in by_head.items():
        justify_at[max(r[3] for r in rules)].append((k, h, rules))

    guesses = []
    vocab = []
    for cid in ids:
        heads = sorted({r.head for r in mcs.rules_into(cid)}, key=head_text)
        guesses.append([frozenset(h) for h in _subsets(heads)])
        vocab.append(frozenset(head_formula(h) for h in heads))

    cache: dict[tuple, list] = {}

    def options(i: int, hs: frozenset) -> list:
        key = (i, hs)
        if key not in cache:
            cache[key] = sorted(_acceptable(mcs.contexts[i], hs, vocab[i]), key=lambda s: sorted(s))
        return cache[key]

    H: list = [None] * n
    S: list = [None] * n

    def applicable(lits) -> bool:
        return all((a in S[c]) != neg for c, a, neg in lits)

    def consistent_at(i: int) -> bool:
        for k, head, lits, _ in checks_at[i]:
            if head not in H[k] and applicable(lits):
                return False
        for k, head, rules in justify_at[i]:
            if head in H[k] and not any(applicable(r[2]) for r in rules):
                return False
        return True

    def dfs(i: int) -> Iterator[BeliefState]:
        if i == n:
            yield BeliefState(ids, tuple(S))
            return
        for hs in guesses[i]:
            H[i] = hs
            for s in options(i, hs):
                S[i] = s
                if consistent_at(i):
                    yield from dfs(i + 1)
        H[i] = S[i] = None

    yield from dfs(0)


def enumerate_equilibria(mcs: MCS, cap: int = DEFAULT_CAP) -> list[BeliefState]:
    """All equilibria, deduplicated and in canonical order."""
    return sorted(set(iter_equilibria(mcs, cap)), key=BeliefState.sort_key)


def is_inconsistent(mcs: MCS, cap: int = DEFAULT_CAP) -> bool:
    return next(iter_equilibria(mcs, cap), None) is None


def is_consistent(mcs: MCS, cap: int = DEFAULT_CAP) -> bool:
    return not is_inconsistent(mcs, cap)


# -- modification ---------------------------------------------------------------------


def unconditional_id(rid: str, taken: set[str]) -> str:
    new = f"{rid}__u"
    while new in taken:
        new += "_"
    return new


def modify(mcs: MCS, keep: Iterable[str], force: Iterable[str] = ()) -> MCS:
    """Replace the bridge rules by ``keep`` plus unconditional copies of ``force``.

    Kept rules retain their ids; each forced rule becomes a copy with an
    empty body under a fresh id derived from the original (``r1`` gives
    ``r1__u``).  Contexts are untouched.
    """
    keep, force = set(keep), set(force)
    known = set(mcs.rule_ids)
    unknown = (keep | force) - known
    if unknown:
        raise ValueError(f"unknown rule ids: {sorted(unknown)}")
    rules = [r for r in mcs.rules if r.id in keep]
    taken = set(known)
    for r in mcs.rules:
        if r.id in force:
            new = unconditional_id(r.id, taken)
            taken.add(new)
            rules.append(BridgeRule(new, r.head_context, r.head, ()))
    return mcs.with_rules(rules)
