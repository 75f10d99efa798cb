from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bml import exactsheaf as xs


def catalog_filtration() -> xs.FiltrationSpec:
    """O(0)+O(2) at level 3, destabilized by the O(2) summand."""
    ambient = xs.split_p1([0, 2])
    sub = xs.line_p1(2)
    return xs.FiltrationSpec(
        weights=(Fraction(2, 3), Fraction(-1)),
        steps=(sub, ambient),
        v_dims=(6, 10),
        ambient=ambient,
        level=3,
    )


def test_h0_counts():
    assert xs.h0_p1(3) == 4
    assert xs.h0_p1(-1) == 0
    assert xs.h0_p2(2) == 6
    assert xs.h0_tangent_p2(0) == 8
    assert xs.h0_tangent_p2(1) == 15


def test_slopes():
    assert xs.mu(xs.split_p1([0, 2])) == 1
    assert xs.mu(xs.line_p1(2)) == 2
    assert xs.mu(xs.tangent_p2()) == Fraction(3, 2)


def test_catalog_invariants():
    filt = catalog_filtration()
    grading = xs.weight_grading(filt)
    assert grading.j == 3
    assert grading.integer_weights == (2, -3)
    assert xs.m_na(filt) == Fraction(-10, 3)
    assert xs.j_na(grading, filt.weights) == Fraction(5, 3)
    assert xs.m2_slope_prediction(filt) == Fraction(-2, 3)


def test_weight_sum_identity_catalog():
    lhs, rhs = xs.weight_sum_identity(catalog_filtration())
    assert rhs == 2 * lhs == Fraction(-2, 3)


def test_trivial_filtration_vanishes():
    ambient = xs.split_p1([0, 2])
    filt = xs.trivial_filtration(ambient, 3)
    assert xs.m_na(filt) == 0
    assert xs.m2_slope_prediction(filt) == 0
    grading = xs.weight_grading(filt)
    assert xs.j_na(grading, filt.weights) == 0


def test_filtration_validation():
    ambient = xs.split_p1([0, 2])
    sub = xs.line_p1(2)
    with pytest.raises(ValueError, match="decreasing"):
        xs.FiltrationSpec(
            weights=(Fraction(-1), Fraction(2, 3)),
            steps=(sub, ambient), v_dims=(6, 10), ambient=ambient, level=3,
        )
    with pytest.raises(ValueError, match="trace-free"):
        xs.FiltrationSpec(
            weights=(Fraction(1, 2), Fraction(-1)),
            steps=(sub, ambient), v_dims=(6, 10), ambient=ambient, level=3,
        )
    with pytest.raises(ValueError, match="norm"):
        xs.FiltrationSpec(
            weights=(Fraction(4, 3), Fraction(-2)),
            steps=(sub, ambient), v_dims=(6, 10), ambient=ambient, level=3,
        )
    with pytest.raises(ValueError, match="ambient rank"):
        xs.FiltrationSpec(
            weights=(Fraction(2, 3), Fraction(-1)),
            steps=(sub, sub), v_dims=(6, 10), ambient=ambient, level=3,
        )


def test_weight_sum_identity_randomized():
    from bml.acceptance import _random_filtration

    rng = np.random.default_rng(99)
    for _ in range(200):
        filt = _random_filtration(rng)
        lhs, rhs = xs.weight_sum_identity(filt)
        assert rhs == 2 * lhs


def test_two_step_closed_form_randomized():
    rng = np.random.default_rng(7)
    for _ in range(100):
        degs = tuple(int(rng.integers(-2, 5)) for _ in range(int(rng.integers(2, 5))))
        r1 = int(rng.integers(1, len(degs)))
        ambient = xs.split_p1(degs)
        sub = xs.split_p1(degs[:r1])
        k = xs.regularity_catalog(degs) + 1
        v1 = sum(xs.h0_p1(d + k) for d in degs[:r1])
        v2 = ambient.h0_at(k)
        m1, m2 = v1, v2 - v1
        top = max(m1, m2)
        filt = xs.FiltrationSpec(
            weights=(Fraction(m2, top), Fraction(-m1, top)),
            steps=(sub, ambient), v_dims=(v1, v2), ambient=ambient, level=k,
        )
        closed = 2 * (filt.weights[0] - filt.weights[1]) * sub.rank * (
            xs.mu(ambient) - xs.mu(sub)
        )
        assert xs.m_na(filt) == closed


def test_stability_verdicts():
    ambient = xs.split_p1([0, 2])
    sub = xs.line_p1(2)
    assert xs.le_potier_verdict(sub, ambient, 3) == 1
    verdict, witness = xs.slope_stability_verdict(ambient, [sub, xs.line_p1(0)])
    assert verdict == "unstable" and witness.label == "O(2)"
    verdict, _ = xs.slope_stability_verdict(xs.split_p1([1, 1]), [xs.line_p1(1)])
    assert verdict == "semistable"
    with pytest.raises(xs.EmptyCandidates):
        xs.slope_stability_verdict(ambient, [])


def test_f_max_split():
    f = xs.f_max_split([0, 2, 2, -1])
    assert f.rank == 2 and f.degree == 4


def test_regularity_catalog():
    assert xs.regularity_catalog((0, 2)) == 0
    assert xs.regularity_catalog((2,)) == -2
    assert xs.regularity_catalog("euler_tp2") == -1
    assert xs.k0_level((0, 2)) == 0


def test_rationalize_exact_inputs_unchanged():
    out = xs.rationalize_weights([0.5, -0.25], 8)
    assert out == [Fraction(1, 2), Fraction(-1, 4)]


def test_rationalize_preserves_order():
    ws = [2.0 / 3.0 + 1e-11, -1.0 + 1e-11]
    out = xs.rationalize_weights(ws, 12)
    assert all(a > b for a, b in zip(out, out[1:]))
    diffs = [w - float(o) for w, o in zip(ws, out)]
    assert all(a > b for a, b in zip(diffs, diffs[1:]))


def test_rationalize_bound_too_small():
    with pytest.raises(xs.BoundTooSmall):
        xs.rationalize_weights([0.123456789, 0.123456788], 2)


@given(st.fractions(max_denominator=1000))
@settings(max_examples=200, deadline=None)
def test_frac_str_roundtrip(x):
    assert xs.parse_frac(xs.frac_str(x)) == x


def test_filtration_serialization_roundtrip():
    filt = catalog_filtration()
    data = xs.filtration_to_dict(filt)
    back = xs.filtration_from_dict(data)
    assert back.weights == filt.weights
    assert back.v_dims == filt.v_dims
    assert back.level == filt.level
    assert [s.rank for s in back.steps] == [s.rank for s in filt.steps]
    assert xs.m_na(back) == xs.m_na(filt)
