import math

import numpy as np
import pytest
from scipy import stats

from unitarg.bounds import classify_case, principal_cosines, theorem1_check
from unitarg.eig import eig_unitary, top_eigenspace
from unitarg.sampling import (
    AngleOutOfRange,
    InfeasibleAngles,
    InfeasibleGap,
    SampleSpec,
    draw_pair,
    equality_pair,
    gap_pair,
    haar_matrix,
    haar_unitary,
    random_equality_pair,
    trial_rng,
    unitary_with_spectrum,
)


def test_haar_n1_is_a_phase():
    rng = trial_rng(3)
    phases = [np.angle(haar_unitary(1, rng).entries[0, 0]) for _ in range(2000)]
    assert stats.kstest(phases, stats.uniform(-math.pi, 2 * math.pi).cdf).pvalue > 0.001


def test_haar_bitwise_reproducible():
    a = haar_unitary(4, trial_rng(123, 7)).entries
    b = haar_unitary(4, trial_rng(123, 7)).entries
    c = haar_unitary(4, trial_rng(123, 8)).entries
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_haar_eigenangle_histogram_uniform():
    rng = trial_rng(99)
    angles = np.concatenate([np.angle(np.linalg.eigvals(haar_matrix(3, rng)))
                             for _ in range(10_000)])
    counts, _ = np.histogram(angles, bins=24, range=(-math.pi, math.pi))
    assert stats.chisquare(counts).pvalue > 0.001


def test_haar_left_invariance_trace_statistic():
    rng = trial_rng(5)
    q = haar_matrix(3, trial_rng(6))
    xs = [haar_matrix(3, rng) for _ in range(10_000)]
    t1 = [np.trace(x).real for x in xs[:5000]]
    t2 = [np.trace(q @ x).real for x in xs[5000:]]
    assert stats.ks_2samp(t1, t2).pvalue > 0.001


def test_unitary_with_spectrum_roundtrip(rng):
    u = unitary_with_spectrum([0.0, 0.0, 0.0], rng)
    assert np.allclose(u.entries, np.eye(3), atol=1e-14)
    s = eig_unitary(unitary_with_spectrum([math.pi / 2, -math.pi / 3], rng))
    np.testing.assert_allclose(s.desc, [math.pi / 2, -math.pi / 3], atol=1e-8)
    for _ in range(50):
        angles = rng.uniform(-math.pi + 1e-3, math.pi, size=5)
        s = eig_unitary(unitary_with_spectrum(angles, rng))
        np.testing.assert_allclose(s.desc, np.sort(angles)[::-1], atol=1e-8)


@pytest.mark.parametrize("bad", [[-math.pi], [4.0], [math.nan], []])
def test_unitary_with_spectrum_rejects(bad, rng):
    with pytest.raises(AngleOutOfRange):
        unitary_with_spectrum(bad, rng)


def test_equality_pair_basic(rng):
    u, v = equality_pair(2, 0.5, 0.7, rng)
    desc, _ = theorem1_check(u, v)
    assert desc.preconditions_ok
    assert abs(desc.slack) <= 1e-8 and desc.intersection_dim >= 1


def test_equality_pair_sum_pi(rng):
    u, v = equality_pair(4, math.pi / 2, math.pi / 2, rng)
    desc, _ = theorem1_check(u, v)
    assert desc.preconditions_ok and desc.equality_detected


def test_equality_pair_infeasible(rng):
    with pytest.raises(InfeasibleAngles):
        equality_pair(3, 2.0, 2.0, rng)
    with pytest.raises(InfeasibleAngles):
        equality_pair(3, -2.0, -2.0, rng)


def test_equality_pairs_always_pass_preconditions(rng):
    for k in range(300):
        n = int(rng.integers(1, 8))
        case_ii = n > 1 and k % 3 == 0
        u, v = random_equality_pair(n, rng, case_ii=case_ii)
        su, sv = eig_unitary(u), eig_unitary(v)
        label = classify_case(su, sv).value
        assert label == ("case_ii" if case_ii else "case_i")


def test_gap_pair_orthogonal(rng):
    u, v = gap_pair(2, math.pi / 2, rng)
    desc, _ = theorem1_check(u, v)
    assert desc.slack > 1e-8 and desc.intersection_dim == 0


def test_gap_pair_angle_is_planted(rng):
    for gap in (0.1, 0.5, 1.2):
        u, v = gap_pair(4, gap, rng)
        su, sv = eig_unitary(u), eig_unitary(v)
        cos = principal_cosines(top_eigenspace(su), top_eigenspace(sv))
        assert math.acos(min(1.0, cos.max())) == pytest.approx(gap, abs=1e-8)
        assert theorem1_check(u, v, sys_u=su, sys_v=sv)[0].intersection_dim == 0


@pytest.mark.parametrize("n, gap", [(1, 0.1), (3, 0.0), (3, 2.0)])
def test_gap_pair_infeasible(n, gap, rng):
    with pytest.raises(InfeasibleGap):
        gap_pair(n, gap, rng)


def test_sample_spec_validation():
    with pytest.raises(ValueError):
        SampleSpec(n=0)
    with pytest.raises(ValueError):
        SampleSpec(n=2, kind="bogus")
    with pytest.raises(ValueError):
        SampleSpec(n=2, kind="fixed_spectrum")
    with pytest.raises(ValueError):
        SampleSpec(n=2, planted_gap=-1.0)


@pytest.mark.parametrize("kind", ["haar", "case_targeted", "equality_planted", "gap_planted"])
def test_draw_pair_deterministic(kind):
    spec = SampleSpec(n=3, kind=kind, seed=42)
    a = draw_pair(spec, 5)
    b = draw_pair(spec, 5)
    for x, y in zip(a, b):
        assert np.array_equal(x.entries, y.entries)


def test_draw_pair_fixed_spectrum():
    spec = SampleSpec(n=3, kind="fixed_spectrum", spectrum=(0.3, -0.2, 1.0), seed=1)
    u, v = draw_pair(spec, 0)
    np.testing.assert_allclose(eig_unitary(u).desc, [1.0, 0.3, -0.2], atol=1e-8)
    np.testing.assert_allclose(eig_unitary(v).desc, [1.0, 0.3, -0.2], atol=1e-8)
