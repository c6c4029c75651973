import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinalign.majorization import majorizes
from spinalign.projectors import (
    BOTH,
    NEITHER,
    ONLY1,
    ONLY2,
    JordanDecomposition,
    OverlapConstraint,
    feasible,
    jordan_blocks,
    optimal_pair,
    overlap,
    pair_spectrum,
    projector_sweep,
    random_feasible_pair,
)
from spinalign.tensor import SiteLayout, hermitian_spectrum, lift, projector_onto, random_projector, random_pure_state, singular_values


def test_commuting_pair_has_no_2d_blocks():
    p1, p2 = np.diag([1.0, 1, 0, 0]), np.diag([0.0, 1, 1, 0])
    dec = jordan_blocks(p1, p2)
    assert dec.two_d_blocks == []
    assert sorted(dec.labels()) == sorted([ONLY1, BOTH, ONLY2, NEITHER])


def test_rank_one_pair_at_angle():
    theta = 0.7
    a = np.array([1.0, 0])
    b = np.array([math.cos(theta), math.sin(theta)])
    dec = jordan_blocks(np.outer(a, a), np.outer(b, b))
    assert len(dec.two_d_blocks) == 1
    assert dec.cosines()[0] == pytest.approx(abs(math.cos(theta)))


def test_equal_projectors_are_all_shared():
    p = random_projector(5, 3, 1)
    dec = jordan_blocks(p, p)
    assert dec.labels().count(BOTH) == 3 and dec.labels().count(NEITHER) == 2


def test_non_projector_rejected():
    with pytest.raises(ValueError, match="not a projector"):
        jordan_blocks(np.diag([0.5, 0]), np.eye(2))


def test_feasibility_examples():
    assert not feasible(OverlapConstraint(4, 3, 3, 1.5))
    assert feasible(OverlapConstraint(4, 2, 2, 0))
    assert feasible(OverlapConstraint(3, 0, 3, 0.0))
    with pytest.raises(ValueError):
        optimal_pair(OverlapConstraint(4, 3, 3, 1.5))


def test_constraint_caps_overlap_budget():
    assert OverlapConstraint(6, 2, 3, 5.0).c == 2.0
    with pytest.raises(ValueError):
        OverlapConstraint(3, 4, 1, 0)


def test_optimal_pair_examples():
    p1, p2 = optimal_pair(OverlapConstraint(5, 2, 3, 2))
    assert np.allclose(p1 @ p2, p1)
    p1, p2 = optimal_pair(OverlapConstraint(4, 2, 2, 0))
    assert np.allclose(p1 @ p2, 0)
    p1, p2 = optimal_pair(OverlapConstraint(4, 2, 2, 1.5))
    dec = jordan_blocks(p1, p2)
    assert dec.labels().count(BOTH) == 1
    assert dec.cosines() == [pytest.approx(0.5)]
    assert overlap(p1, p2) == pytest.approx(1.5)


def test_pair_spectrum_examples():
    dec = JordanDecomposition(2, one_d_blocks=[(np.array([1.0, 0]), ONLY1), (np.array([0, 1.0]), ONLY2)])
    assert np.allclose(pair_spectrum(dec, 1, 1), [1, 1])
    dec = JordanDecomposition(1, one_d_blocks=[(np.array([1.0]), BOTH)])
    assert np.allclose(pair_spectrum(dec, 1, 2), [3])
    dec = JordanDecomposition(2, two_d_blocks=[(np.eye(2), 0.5)])
    assert np.allclose(pair_spectrum(dec, 1, 1), [1.5, 0.5])
    with pytest.raises(ValueError):
        pair_spectrum(dec, -1, 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 7), st.data())
def test_decomposition_invariants(dim, data):
    r1 = data.draw(st.integers(0, dim))
    r2 = data.draw(st.integers(0, dim))
    seed = data.draw(st.integers(0, 2**31))
    p1, p2 = random_projector(dim, r1, seed) if r1 else np.zeros((dim, dim)), random_projector(dim, r2, seed + 1) if r2 else np.zeros((dim, dim))
    dec = jordan_blocks(p1, p2)
    total = len(dec.one_d_blocks) + 2 * len(dec.two_d_blocks)
    assert total == dim
    frame = np.column_stack([v for v, _ in dec.one_d_blocks] + [f for f, _ in dec.two_d_blocks] or [np.zeros((dim, 0))])
    assert np.allclose(frame.conj().T @ frame, np.eye(dim), atol=1e-9)
    r1_, r2_ = dec.reconstruct()
    assert np.allclose(r1_, p1, atol=1e-9) and np.allclose(r2_, p2, atol=1e-9)
    assert all(0 < c < 1 for c in dec.cosines())
    expected = sorted([1.0] * dec.labels().count(BOTH) + dec.cosines(), reverse=True)
    sv = singular_values(p1 @ p2)
    assert np.allclose(sv[: len(expected)], expected, atol=1e-9)
    assert np.allclose(sv[len(expected):], 0, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.data())
def test_optimal_pair_properties(dim, data):
    r1 = data.draw(st.integers(0, dim))
    r2 = data.draw(st.integers(0, dim))
    lo = max(r1 + r2 - dim, 0)
    c = data.draw(st.floats(lo, max(min(r1, r2), lo)))
    con = OverlapConstraint(dim, r1, r2, c)
    p1, p2 = optimal_pair(con)
    assert np.trace(p1).real == pytest.approx(r1) and np.trace(p2).real == pytest.approx(r2)
    assert overlap(p1, p2) == pytest.approx(con.c, abs=1e-10)
    dec = jordan_blocks(p1, p2)
    for s1, s2 in [(1, 1), (0.3, 2.0), (0, 1)]:
        assert np.allclose(pair_spectrum(dec, s1, s2), hermitian_spectrum(s1 * p1 + s2 * p2), atol=1e-10)


def test_random_feasible_pairs_obey_constraint(rng):
    for _ in range(200):
        dim = int(rng.integers(1, 9))
        r1, r2 = (int(x) for x in rng.integers(0, dim + 1, size=2))
        lo = max(r1 + r2 - dim, 0)
        con = OverlapConstraint(dim, r1, r2, rng.uniform(lo, max(min(r1, r2), lo)))
        p1, p2 = random_feasible_pair(con, rng)
        assert np.trace(p1).real == pytest.approx(r1) and np.trace(p2).real == pytest.approx(r2)
        assert overlap(p1, p2) <= con.c + 1e-9


def test_sweep_small():
    res = projector_sweep(OverlapConstraint(6, 3, 2, 1.4), 50, [(1, 1), (0.2, 0.9)], seed=4)
    assert res.ok and res.formula_error < 1e-10
    assert res.optimal_overlap == pytest.approx(1.4)


def test_lowering_a_cosine_never_raises_fan_norms(rng):
    for _ in range(100):
        s1, s2 = rng.uniform(0, 2, size=2)
        c_hi = rng.uniform(0, 1)
        c_lo = rng.uniform(0, c_hi)
        hi = JordanDecomposition(2, two_d_blocks=[(np.eye(2), c_hi)])
        lo = JordanDecomposition(2, two_d_blocks=[(np.eye(2), c_lo)])
        assert majorizes(pair_spectrum(hi, s1, s2), pair_spectrum(lo, s1, s2))
        assert pair_spectrum(lo, s1, s2)[0] <= pair_spectrum(hi, s1, s2)[0] + 1e-12


def test_two_term_projector_overlap_bound(rng):
    # Q proportional to a rank-2 projector on C^3, sites I1 = {1}, I2 = {2} inside n = 3
    d, n, r = 3, 3, 2
    lay = SiteLayout(d, n)
    proj_q = [1.0, 1.0, 0.0]
    i1, i2 = {1}, {2}
    bound = r ** (n - len(i1 | i2))
    e0 = np.zeros(3)
    e0[0] = 1
    c1 = lift(lay, i1, np.outer(e0, e0), proj_q)
    c2 = lift(lay, i2, np.outer(e0, e0), proj_q)
    assert overlap(c1, c2) == pytest.approx(bound)
    for _ in range(30):
        a = lift(lay, i1, projector_onto(random_pure_state(3, rng)), proj_q)
        b = lift(lay, i2, projector_onto(random_pure_state(3, rng)), proj_q)
        assert overlap(a, b) <= bound + 1e-9
