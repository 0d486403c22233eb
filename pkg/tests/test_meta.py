import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MCS_FIXTURES, load, load_program
from mcskit.analysis import Diagnosis, all_diagnoses, is_diagnosis, minimal_diagnoses
from mcskit.core import MCS, Context
from mcskit.logics import FACTS, AspKB, AspRule, FactsKB, asp_acc, fact
from mcskit.meta import (
    ObserverProgram,
    PreferenceProgram,
    build_observed_mcs,
    encode_diagnosis,
    filter_diagnoses,
    observed_diagnoses,
    observer_accepts,
    preferred_diagnoses,
    select_preferred,
    strictly_better,
)
from randmcs import positive_constraint_observer, random_mcs

EMPTY = ObserverProgram()


def d(d1=(), d2=()):
    return Diagnosis(set(d1), set(d2))


def observer(name):
    return ObserverProgram(load_program(name))


def test_encode_examples(hospital):
    single = MCS((Context("c1", FACTS, FactsKB()),), load("oddloop.mcs").rules[:1])
    assert encode_diagnosis(d(), single) == {"rule(r1)"}
    assert encode_diagnosis(d(["r1"]), load("oddloop.mcs")) == {"rule(r1)", "rule(r2)", "d1(r1)"}
    assert encode_diagnosis(d((), ["r5"]), hospital) == {f"rule(r{i})" for i in range(1, 6)} | {"d2(r5)"}


def test_partial_observation_scope(hospital):
    assert encode_diagnosis(d(["r1", "r4"]), hospital, scope=["r4"]) == {"rule(r4)", "d1(r4)"}
    with pytest.raises(ValueError):
        encode_diagnosis(d(), hospital, scope=["r9"])


def test_observer_programs_reject_input_heads():
    with pytest.raises(ValueError):
        ObserverProgram(AspKB({fact("d1(r1)")}))
    with pytest.raises(ValueError):
        PreferenceProgram(AspKB({AspRule({"d2a(r1)"}, {"x"})}))


@pytest.mark.parametrize("name", MCS_FIXTURES)
def test_empty_observer_keeps_minimal_diagnoses(name):
    m = load(name)
    assert filter_diagnoses(m, EMPTY) == minimal_diagnoses(m)
    assert observer("observer_empty.lp") == EMPTY


def test_filter_examples(oddloop, hospital):
    assert filter_diagnoses(oddloop, observer("observer_no_d2.lp")) == [d(["r1"]), d(["r2"])]
    expected = [x for x in minimal_diagnoses(hospital) if x != d(["r2"])]
    assert filter_diagnoses(hospital, observer("observer_keep_r2.lp")) == expected


def test_excluded_diagnoses_fail_observer(hospital):
    for name in ("observer_keep_r2.lp", "observer_no_force.lp"):
        obs = observer(name)
        kept = filter_diagnoses(hospital, obs)
        for x in minimal_diagnoses(hospital):
            facts = AspKB(fact(a) for a in encode_diagnosis(x, hospital))
            assert (x in kept) == bool(asp_acc(obs.program | facts))


def test_observed_mcs_shape(oddloop):
    mf = build_observed_mcs(oddloop, observer("observer_no_d2.lp"))
    assert mf.context_ids == ("c1", "c2", "ob")
    assert len(mf.rules) == 3 * len(oddloop.rules)
    assert set(oddloop.rule_ids) <= set(mf.rule_ids)
    with pytest.raises(ValueError):
        build_observed_mcs(mf, EMPTY)


@pytest.mark.parametrize("name", MCS_FIXTURES)
@pytest.mark.parametrize("obs", ["observer_empty.lp", "observer_no_d2.lp", "observer_keep_r2.lp", "observer_no_force.lp"])
def test_observed_equivalence_on_fixtures(name, obs):
    m = load(name)
    program = load_program(obs)
    # observers that name rules the fixture lacks only see absent facts
    f = ObserverProgram(program)
    assert observed_diagnoses(m, f) == filter_diagnoses(m, f)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_observed_equivalence_random(seed):
    rng = random.Random(seed)
    m = random_mcs(rng, max_rules=4)
    f = ObserverProgram(positive_constraint_observer(rng, list(m.rule_ids)))
    assert observed_diagnoses(m, f) == filter_diagnoses(m, f)


def _any_observer(rng, ids):
    rules = set()
    for _ in range(rng.randint(1, 3)):
        pos = {f"{rng.choice(('d1', 'd2'))}({rng.choice(ids)})" for _ in range(rng.randint(0, 2))}
        neg = {f"{rng.choice(('d1', 'd2'))}({rng.choice(ids)})" for _ in range(rng.randint(0, 1))}
        if pos or neg:
            rules.add(AspRule((), pos, neg))
    return AspKB(rules)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_observed_system_for_arbitrary_observers(seed):
    # the observer can only see a smaller disjoint diagnosis than the one applied
    rng = random.Random(seed)
    m = random_mcs(rng, max_rules=4)
    f = ObserverProgram(_any_observer(rng, list(m.rule_ids)))
    accepted = [x for x in all_diagnoses(m) if not x.d1 & x.d2 and observer_accepts(f, x, m)]
    expected = sorted((x for x in accepted if not any(y < x for y in accepted)), key=Diagnosis.sort_key)
    assert observed_diagnoses(m, f) == expected


def test_observed_equivalence_with_scope(hospital):
    f = ObserverProgram(AspKB({AspRule((), {"d1(r2)"})}))
    scoped = observed_diagnoses(hospital, f, scope=["r2", "r4"])
    assert scoped == filter_diagnoses(hospital, f, scope=["r2", "r4"])


def test_preference_examples(oddloop):
    never = PreferenceProgram()
    assert preferred_diagnoses(oddloop, never) == minimal_diagnoses(oddloop)
    fewer = PreferenceProgram(load_program("prefer_fewer_d1.lp"))
    assert preferred_diagnoses(oddloop, fewer) == [d((), ["r1"]), d((), ["r2"])]
    assert select_preferred(oddloop, fewer, [d(["r1"])]) == [d(["r1"])]


def test_preference_table_matches_sizes(oddloop, hospital):
    fewer = PreferenceProgram(load_program("prefer_fewer_d1.lp"))
    for m in (oddloop, hospital):
        cands = minimal_diagnoses(m)
        for a in cands:
            for b in cands:
                assert strictly_better(fewer, a, b, m) == (len(a.d1) < len(b.d1))


def test_preference_with_observer(hospital):
    fewer = PreferenceProgram(load_program("prefer_fewer_d1.lp"))
    no_force = observer("observer_no_force.lp")
    assert preferred_diagnoses(hospital, fewer) == [d((), ["r5"])]
    assert preferred_diagnoses(hospital, fewer, no_force) == [d(["r1"]), d(["r2"]), d(["r4"])]


def test_preferred_is_antichain_subset(hospital):
    fewer = PreferenceProgram(load_program("prefer_fewer_d1.lp"))
    cands = minimal_diagnoses(hospital)
    best = preferred_diagnoses(hospital, fewer)
    assert set(best) <= set(cands)
    for a in best:
        assert all(not strictly_better(fewer, b, a, hospital) for b in best if b != a)
        assert is_diagnosis(hospital, a)


def test_observed_system_differs_for_upward_observers(oddloop):
    # rejects every minimal diagnosis but accepts the removal of both rules
    f = ObserverProgram(AspKB({AspRule((), neg={"d1(r1)"}), AspRule((), neg={"d1(r2)"})}))
    assert filter_diagnoses(oddloop, f) == []
    assert observed_diagnoses(oddloop, f) == [d(["r1", "r2"])]
