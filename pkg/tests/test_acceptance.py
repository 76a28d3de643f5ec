"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
import warnings

import pytest

from conftest import ACCEPTANCE_LINES
from oracles import charpoly_angles, circular_multiset_distance
from unitarg.bounds import CaseLabel, reduction_audit, theorem1_check
from unitarg.core import make_unitary, op_norm
from unitarg.eig import eig_unitary
from unitarg.harness import TrialCampaign, run_campaign
from unitarg.numrange import (
    DegenerateAmbiguity,
    lemma1_preconditions,
    minmax_verify,
    product_phase_decomposition,
)
from unitarg.sampling import (
    SampleSpec,
    case_pair,
    gap_pair,
    haar_matrix,
    haar_unitary,
    random_equality_pair,
    trial_rng,
    unitary_with_spectrum,
)
from unitarg.spectral import fractional_power

pytestmark = pytest.mark.acceptance

TOL = 1e-8
FUZZ_N = (2, 4, 8)
FUZZ_TRIALS = 10_000


def record(number: int, ok: bool, text: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _fuzz(check: str, kind: str, seed: int, case: str | None = None):
    per_n = {}
    start = time.perf_counter()
    for n in FUZZ_N:
        spec = SampleSpec(n=n, kind=kind, case_target=case)
        per_n[n] = run_campaign(TrialCampaign(spec, FUZZ_TRIALS, (check,), seed=seed))
    return per_n, time.perf_counter() - start


def _describe(per_n, check):
    parts = []
    for n, s in per_n.items():
        st = s.checks[check]
        parts.append(f"n={n} pass={st.counts['pass']} vacuous={st.counts['vacuous']} "
                     f"boundary={st.counts['boundary']} skipped={st.counts['skipped']} "
                     f"fail={st.counts['fail']} worst={st.worst_slack}")
    return "; ".join(parts)


def test_criterion_1_theorem1_fuzz():
    haar, t_haar = _fuzz("T1", "haar", seed=101)
    targeted, t_targeted = _fuzz("T1", "case_targeted", seed=102)
    fails = 0
    worst = math.inf
    for s in (*haar.values(), *targeted.values()):
        st = s.checks["T1"]
        fails += st.counts["fail"]
        if st.worst_slack is not None:
            worst = min(worst, st.worst_slack)
    ok = fails == 0 and worst >= -TOL and t_haar <= 120.0
    record(1, ok, f"Haar filtered [{_describe(haar, 'T1')}] in {t_haar:.1f}s; "
                  f"case-targeted [{_describe(targeted, 'T1')}] in {t_targeted:.1f}s")
    assert ok


def test_criterion_2_theorem2_fuzz():
    per_n, elapsed = _fuzz("T2", "haar", seed=202)
    fails = sum(s.checks["T2"].counts["fail"] for s in per_n.values())
    worst = min(s.checks["T2"].worst_slack for s in per_n.values())
    ok = fails == 0 and worst >= -TOL and elapsed <= 120.0
    record(2, ok, f"[{_describe(per_n, 'T2')}] in {elapsed:.1f}s")
    assert ok


def test_criterion_3_product_phase_identity():
    rng = trial_rng(303)
    pairs = 0
    worst = 0.0
    while pairs < 1000:
        n = 1 + pairs % 6
        u, v = case_pair(n, "case_i", rng)
        su, sv = eig_unitary(u), eig_unitary(v)
        if not lemma1_preconditions(su, sv):
            continue
        suv = eig_unitary(make_unitary(u.entries @ v.entries))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateAmbiguity)
            for j in range(1, n + 1):
                r = product_phase_decomposition(u, v, j, sys_u=su, sys_v=sv, sys_uv=suv)
                worst = max(worst, abs(r.arg_u + r.arg_v - r.theta))
        pairs += 1
    ok = worst <= TOL
    record(3, ok, f"{pairs} pairs, n in 1..6, max |argU + argV - theta_j| = {worst:.3e}")
    assert ok


def test_criterion_4_minmax():
    rng = trial_rng(404)
    worst_extremizer = 0.0
    worst_margin = math.inf
    bad = 0
    for i in range(200):
        n = 2 + i % 3
        u = unitary_with_spectrum(rng.uniform(-1.5, 1.5, size=n), rng)
        su = eig_unitary(u)
        assert su.spread < math.pi
        for j in range(1, n + 1):
            r = minmax_verify(u, j, 100, int(rng.integers(2**63)), sys_u=su)
            worst_extremizer = max(worst_extremizer, abs(r.extremizer_max_arg - r.theta_j))
            worst_margin = min(worst_margin, r.worst_margin)
            bad += not r.ok
    ok = bad == 0 and worst_extremizer <= TOL and worst_margin >= -TOL
    record(4, ok, f"200 U (n in 2..4), 100 subspaces per j: extremizer error "
                  f"{worst_extremizer:.3e}, worst max_arg - theta_j = {worst_margin:.3e}, "
                  f"failing (U, j) = {bad}")
    assert ok


def test_criterion_5_equality_iff():
    rng = trial_rng(505)
    detected = flagged = other = 0
    for i in range(1000):
        n = 1 + i % 6
        u, v = random_equality_pair(n, rng, case_ii=(n > 1 and i % 4 == 0))
        desc, _ = theorem1_check(u, v)
        if desc.equality_detected and desc.intersection_dim >= 1:
            detected += 1
        elif desc.boundary:
            flagged += 1
        else:
            other += 1
    gap_ok = 0
    min_slack = math.inf
    for i in range(1000):
        n = 2 + i % 5
        u, v = gap_pair(n, float(rng.uniform(0.1, math.pi / 2)), rng)
        desc, _ = theorem1_check(u, v)
        min_slack = min(min_slack, desc.slack)
        gap_ok += desc.slack > TOL and desc.intersection_dim == 0
    ok = detected >= 990 and other == 0 and gap_ok == 1000
    record(5, ok, f"equality_pair: {detected}/1000 detected, {flagged} boundary, {other} other; "
                  f"gap_pair: {gap_ok}/1000 strict with dim 0 (min slack {min_slack:.3e})")
    assert ok


def test_criterion_6_case_ii_reduction():
    rng = trial_rng(606)
    good = 0
    for i in range(200):
        u, v = case_pair(2 + i % 5, "case_ii", rng)
        a = reduction_audit(u, v)
        good += (a.case == CaseLabel.CASE_II.value and a.a_inside
                 and a.first_pair_case == "case_i" and a.second_pair_case == "case_i"
                 and a.sign_agrees)
    ok = good == 200
    record(6, ok, f"{good}/200 audits: a strictly inside interval, both links case (i), sign agrees")
    assert ok


def test_criterion_7_fractional_power():
    rng = trial_rng(707)
    worst_prod = 0.0
    worst_angles = 0.0
    ok = True
    for i in range(500):
        n = 1 + i % 8
        u = haar_unitary(n, rng)
        s = eig_unitary(u)
        a = float(rng.uniform(0.0, 1.0))
        pa, pb = fractional_power(s, a), fractional_power(s, 1.0 - a)
        err = op_norm(pa.entries @ pb.entries - u.entries)
        dist = circular_multiset_distance(eig_unitary(pa).angles, a * s.angles)
        worst_prod = max(worst_prod, err / n)
        worst_angles = max(worst_angles, dist)
        ok = ok and err <= 1e-9 * n and dist <= TOL
    record(7, ok, f"500 Haar U (n in 1..8): max ||U^a U^(1-a) - U||/n = {worst_prod:.3e}, "
                  f"max angle multiset error = {worst_angles:.3e}")
    assert ok


def test_criterion_8_charpoly_oracle():
    rng = trial_rng(808)
    worst = {}
    for n in (2, 3):
        worst[n] = max(circular_multiset_distance(eig_unitary(make_unitary(m)).angles,
                                                  charpoly_angles(m))
                       for m in (haar_matrix(n, rng) for _ in range(1000)))
    ok = all(w <= TOL for w in worst.values())
    record(8, ok, "1000 samples each, max multiset distance " +
           ", ".join(f"n={n}: {w:.3e}" for n, w in worst.items()))
    assert ok


def test_criterion_9_determinism():
    spec = SampleSpec(n=4, kind="case_targeted")
    c = TrialCampaign(spec, 200, ("T1", "T2", "L1", "L2", "reduction"), seed=909, minmax_trials=3)
    first = run_campaign(c).to_json()
    second = run_campaign(c).to_json()
    parallel = run_campaign(c, workers=2).to_json()
    ok = first == second == parallel
    record(9, ok, f"200-trial campaign, all checks: rerun identical={first == second}, "
                  f"workers=2 identical={first == parallel} ({len(first)} bytes)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
