import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from newsnowcast.multitest import adjust_pvalues, bh_reject


def _two_stage_reference(p, q):
    """Independent reimplementation used as an oracle: plain step-up at
    q/(1+q), null-count estimate, second step-up at the inflated level."""
    p = np.asarray(p, dtype=float)
    m = len(p)

    def step_up(level):
        order = np.argsort(p, kind="stable")
        k = 0
        for i, idx in enumerate(order, start=1):
            if p[idx] <= level * i / m:
                k = i
        mask = np.zeros(m, dtype=bool)
        mask[order[:k]] = True
        return mask

    q1 = q / (1.0 + q)
    m0 = m - int(step_up(q1).sum())
    if m0 == 0:
        return np.ones(m, dtype=bool)
    return step_up(q1 * m / m0)


def test_bh_hand_case():
    p = np.array([0.2, 0.01, 0.04, 0.03, 0.02])
    mask = bh_reject(p, 0.05)
    assert mask.tolist() == [False, True, True, True, True]
    assert bh_reject(np.array([0.5, 0.9]), 0.05).tolist() == [False, False]


def test_two_stage_hand_case():
    # worked by hand: stage one at 0.1/1.1 rejects two, so m0 = 1 and the
    # stage-two level is tripled
    rep = adjust_pvalues([0.004, 0.02, 0.5], q=0.1)
    assert rep.m0_hat == 1
    assert rep.rejected == (True, True, False)
    assert math.isclose(rep.p_adjusted[0], 0.004 * 1.1)
    assert math.isclose(rep.p_adjusted[1], 0.02 * 1.1 / 2)
    assert math.isclose(rep.p_adjusted[2], 0.5 * 1.1 / 3)


def test_adjusted_equivalent_to_rejection():
    rng = np.random.default_rng(11)
    for _ in range(50):
        p = rng.uniform(size=rng.integers(1, 40))
        p[: len(p) // 3] *= 0.01
        rep = adjust_pvalues(p, q=0.05)
        assert rep.rejected == tuple(a <= 0.05 for a in rep.p_adjusted)


def test_matches_reference_implementation():
    rng = np.random.default_rng(12)
    for _ in range(200):
        m = int(rng.integers(1, 30))
        p = rng.uniform(size=m)
        hot = rng.random() < 0.5
        if hot:
            p[: max(1, m // 4)] = rng.uniform(0, 1e-4, size=max(1, m // 4))
        rep = adjust_pvalues(p, q=0.05)
        ref = _two_stage_reference(p, 0.05)
        assert rep.rejected == tuple(bool(v) for v in ref)


def test_saturation_rejects_everything():
    rep = adjust_pvalues([1e-9, 1e-8, 1e-7], q=0.05)
    assert rep.rejected == (True, True, True)
    assert rep.m0_hat == 0
    assert "saturated" in rep.note
    assert rep.p_adjusted == (0.0, 0.0, 0.0)


def test_all_null_rejects_nothing():
    rep = adjust_pvalues([1.0, 1.0, 1.0, 1.0], q=0.05)
    assert rep.rejected == (False, False, False, False)
    assert all(a == 1.0 for a in rep.p_adjusted)


def test_input_validation():
    with pytest.raises(ValueError):
        adjust_pvalues([], q=0.05)
    with pytest.raises(ValueError):
        adjust_pvalues([0.5, 1.5], q=0.05)
    with pytest.raises(ValueError):
        adjust_pvalues([0.5], q=0.0)
    with pytest.raises(ValueError):
        adjust_pvalues([[0.1, 0.2]], q=0.05)


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=25))
def test_adjusted_preserves_p_value_order(ps):
    rep = adjust_pvalues(ps, q=0.05)
    pairs = sorted(zip(ps, rep.p_adjusted))
    adj = [a for _p, a in pairs]
    assert all(a <= b + 1e-15 for a, b in zip(adj, adj[1:]))
    assert all(0.0 <= a <= 1.0 for a in rep.p_adjusted)
