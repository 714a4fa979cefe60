import numpy as np
import pytest

from specious.dataset import Dataset, pair_counts
from specious.measures import PairCounts, conditional_leverages, conditional_signs, leverage
from specious.miner import MinerConfig, Rule, make_rule, mine_top_k, rank_key
from specious.specdetect import (
    NON_SPECIOUS, AlignedPair, VerdictKind, align_pair, check_equivalence, classify_pair,
    evidence_p, orientation_filter, spec_detect, ys_bound_check,
)
from specious.synthgen import brute_force_detect, plant_equivalent, random_dataset


def dataset_from_counts(pc: PairCounts) -> Dataset:
    """Columns X, Q, C realising the eight cells of ``pc``."""
    rows = []
    keys = [(1, 1, 1), (1, 1, 0), (1, 0, 1), (1, 0, 0), (0, 1, 1), (0, 1, 0), (0, 0, 1), (0, 0, 0)]
    for key, count in zip(keys, pc.cells()):
        rows += [key] * count
    return Dataset.from_matrix(np.array(rows), ["X", "Q", "C"])


def r(q, c, pol=1, g=1.0):
    return Rule(tuple(q), c, pol, 10, 10, 6, 40, g)


# -- alignment ----------------------------------------------------------------

def test_align_identity():
    p = align_pair(r([1], 2), r([0], 2, g=2.0))
    assert (p.q, p.x, p.consequent) == ((1,), (0,), 2)
    assert not p.judged_reversed and not p.mediator_reversed


def test_align_reverses_single_attribute_mediator():
    # judged Q -> C, mediator C -> X becomes X -> C
    p = align_pair(r([1], 2), r([2], 0, g=2.0))
    assert (p.q, p.x, p.consequent, p.mediator_reversed) == ((1,), (0,), 2, True)


def test_align_reverses_judged_and_both():
    p = align_pair(r([3], 2), r([0, 1], 3, g=2.0))
    assert (p.q, p.x, p.consequent, p.judged_reversed) == ((2,), (0, 1), 3, True)
    p = align_pair(r([1], 2), r([1], 3, g=2.0))
    assert (p.q, p.x, p.consequent) == ((2,), (3,), 1)
    assert p.judged_reversed and p.mediator_reversed


def test_align_not_applicable():
    assert align_pair(r([1], 2), r([0], 3, g=2.0)) is None
    assert align_pair(r([1, 4], 2), r([0, 5], 3, g=2.0)) is None


# -- orientation filter -------------------------------------------------------------

def _pair(c, a):
    return AlignedPair(r([1], 2, c), r([0], 2, a), (1,), (0,), 2, c, a)


def test_orientation_filter():
    pos = PairCounts(100, 50, 50, 50, 45, 30, 30, 28)   # delta(X,Q) = 0.2
    neg = PairCounts(100, 50, 50, 50, 5, 30, 20, 2)
    assert leverage(100, 50, 50, 45) == pytest.approx(0.2)
    assert orientation_filter(_pair(1, 1), pos) and orientation_filter(_pair(0, 0), neg)
    assert not orientation_filter(_pair(1, 0), pos)
    assert orientation_filter(_pair(0, 1), neg)


# -- equivalence ----------------------------------------------------------------

def test_check_equivalence_forms(f1):
    assert check_equivalence(PairCounts(50, 20, 20, 25, 20, 12, 12, 12)) == "direct"
    assert check_equivalence(PairCounts(50, 20, 30, 25, 0, 12, 13, 0)) == "complement"
    d, t = f1
    assert check_equivalence(pair_counts(d, (0,), (1,), 2)) is None


def test_equivalence_has_zero_conditionals():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = random_dataset(rng, int(rng.integers(10, 80)), 3)
        for mode in ("copy", "complement"):
            d2, t = plant_equivalent(d, 0, mode)
            pc = pair_counts(d2, (t["target_id"],), (0,), 1)
            assert check_equivalence(pc) == ("direct" if mode == "copy" else "complement")
            if mode == "copy":
                assert conditional_leverages(pc) == (0.0, 0.0)


# -- classify_pair ---------------------------------------------------------------

def test_f1_is_type2(f1):
    d, t = f1
    med = make_rule(d, (t["x_id"],), t["c_id"], 1)
    judged = make_rule(d, (t["q_id"],), t["c_id"], 1)
    assert med.goodness > judged.goodness and judged.leverage == pytest.approx(0.05)
    pair = align_pair(judged, med)
    v = classify_pair(pair, d)
    assert v.kind is VerdictKind.TYPE2
    assert v.evidence.delta1 == v.evidence.delta2 == -0.00625
    res = spec_detect([med, judged], d)
    assert res[1][1].kind is VerdictKind.TYPE2 and res[1][1].mediator_index == 0


def test_duplicate_column_is_type0():
    rng = np.random.default_rng(3)
    m = rng.random((60, 3)) < 0.5
    d = Dataset.from_matrix(np.column_stack([m, m[:, 0]]))
    rules = mine_top_k(d, MinerConfig(k=50)).rules
    kinds = {v.kind for _, v in spec_detect(rules, d)}
    assert VerdictKind.TYPE0 in kinds
    forms = {v.equivalence_form for _, v in spec_detect(rules, d) if v.kind is VerdictKind.TYPE0}
    assert forms == {"direct"}


def test_type3_on_weak_mixed_strata():
    pc = PairCounts(100, 50, 50, 50, 40, 40, 34, 33)
    assert conditional_signs(pc) == (1, -1)
    d = dataset_from_counts(pc)
    med, judged = make_rule(d, (0,), 2, 1), make_rule(d, (1,), 2, 1)
    v = classify_pair(align_pair(judged, med), d)
    assert v.kind is VerdictKind.TYPE3 and v.evidence.mi_s < 0.5


def test_conditionally_independent_strata_follow_case_order():
    # delta1 = delta2 = 0 satisfies the type-2 sign test, which is checked first
    pc = PairCounts(100, 50, 50, 50, 40, 40, 34, 32)
    assert conditional_leverages(pc) == (0.0, 0.0)
    d = dataset_from_counts(pc)
    v = classify_pair(align_pair(make_rule(d, (1,), 2, 1), make_rule(d, (0,), 2, 1)), d)
    assert v.kind is VerdictKind.TYPE2 and v.evidence.mi_s == 0.0


def test_type1_superfluous_generalisation():
    rng = np.random.default_rng(5)
    n = 400
    x = rng.random(n) < 0.5
    z = rng.random(n) < 0.5
    c = np.where(x & z, rng.random(n) < 0.9, rng.random(n) < 0.2)
    d = Dataset.from_matrix(np.column_stack([x, z, c]))
    spec = make_rule(d, (0, 1), 2, 1)
    gen = make_rule(d, (0,), 2, 1)
    assert spec.goodness > gen.goodness
    v = classify_pair(align_pair(gen, spec), d)
    assert v.kind is VerdictKind.TYPE1


def test_pathological_flag():
    pc = PairCounts(40, 20, 15, 20, 12, 20, 12, 12)   # X covers exactly C
    d = dataset_from_counts(pc)
    v = classify_pair(align_pair(make_rule(d, (1,), 2, 1), make_rule(d, (0,), 2, 1)), d)
    assert v.kind is VerdictKind.NON_SPECIOUS and v.pathological


def test_pathological_resolution_matches_oracle():
    rng = np.random.default_rng(0)
    seen = 0
    for s in range(150):
        n = int(rng.integers(20, 80))
        x = rng.random(n) < 0.5
        q = np.where(x, rng.random(n) < 0.7, rng.random(n) < 0.3)
        z = rng.random((n, 2)) < 0.5
        m = np.column_stack([x, q, x, z]) if s % 2 else np.column_stack([q, x, z, x])
        d = Dataset.from_matrix(m)
        rules = mine_top_k(d, MinerConfig(k=30)).rules
        res = spec_detect(rules, d)
        assert [(v.kind.value, v.mediator_index) for _, v in res] == brute_force_detect(rules, d)
        seen += sum(v.pathological for _, v in res)
    assert seen > 0


# -- bound check ---------------------------------------------------------------------

def test_ys_bound_examples():
    assert ys_bound_check(0.05, 0.125, 0.125, 0.5)
    assert not ys_bound_check(0.01, 0.0, 0.3, 0.4)
    with pytest.raises(ValueError):
        ys_bound_check(0.1, 0.1, 0.1, 1.0)


def test_ys_bound_is_necessary():
    from oracles import random_pair_counts
    rng = np.random.default_rng(17)
    for _ in range(5000):
        pc = PairCounts(**random_pair_counts(rng, 80, 2))
        if not 0 < pc.n_x < pc.n:
            continue
        n = pc.n
        ok = ys_bound_check(leverage(n, pc.n_q, pc.n_c, pc.n_qc), leverage(n, pc.n_x, pc.n_q, pc.n_xq),
                            leverage(n, pc.n_x, pc.n_c, pc.n_xc), pc.n_x / n)
        s1, s2 = conditional_signs(pc)
        if s1 <= 0 and s2 <= 0 and (s1, s2) != (0, 0):
            assert ok


# -- spec_detect ----------------------------------------------------------------------

def test_single_rule_is_non_specious():
    d = random_dataset(np.random.default_rng(1), 50, 3)
    rules = mine_top_k(d, MinerConfig(k=1)).rules
    assert spec_detect(rules, d)[0][1] == NON_SPECIOUS


def test_unordered_input_rejected():
    d = random_dataset(np.random.default_rng(2), 80, 4)
    rules = mine_top_k(d, MinerConfig(k=5)).rules
    with pytest.raises(ValueError):
        spec_detect(rules[::-1], d)


def test_detector_invariants_and_threads():
    rng = np.random.default_rng(4)
    for _ in range(15):
        d = random_dataset(rng, int(rng.integers(40, 200)), 6)
        rules = mine_top_k(d, MinerConfig(k=40)).rules
        serial = spec_detect(rules, d)
        assert spec_detect(rules, d, threads=4) == serial
        pruned_by = {}
        for i, (rule, v) in enumerate(serial):
            assert (v.mediator is not None) == v.specious
            if not v.specious:
                continue
            j = v.mediator_index
            assert j < i and rank_key(rules[j]) < rank_key(rule)
            pruned_by[i] = j
            assert 0.0 <= v.evidence.p_b <= 1.0
            pc = pair_counts(d, v.pair.x, v.pair.q, v.pair.consequent, v.pair.c, v.pair.a)
            if v.kind is VerdictKind.TYPE2:
                s1, s2 = conditional_signs(pc)
                assert s1 <= 0 and s2 <= 0 and pc.n * pc.n_qc > pc.n_q * pc.n_c
            if v.kind is VerdictKind.TYPE0:
                assert v.evidence.delta1 == v.evidence.delta2 == 0.0
            assert v.evidence.p_b == evidence_p(pc, v.pair.q, v.pair.x)
        for i, j in pruned_by.items():
            assert pruned_by.get(j) != i


def test_type3_significance_is_logged(caplog):
    # alpha = 1 makes every type-3 verdict "significant"
    rng = np.random.default_rng(6)
    for _ in range(40):
        d = random_dataset(rng, 120, 6)
        rules = mine_top_k(d, MinerConfig(k=40)).rules
        res = spec_detect(rules, d, alpha=1.0001)
        if any(v.kind is VerdictKind.TYPE3 for _, v in res):
            assert "type3 prune" in caplog.text
            return
    pytest.skip("no type-3 verdict in the sampled datasets")
