"""Seeded fuzz campaigns over the bounds and lemmas, with single-trial replay."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .bounds import (
    CaseLabel,
    classify_case,
    reduction_audit,
    theorem1_check,
    theorem2_check,
)
from .core import ToleranceProfile, UnitargError, compose
from .eig import eig_unitary
from .numrange import (
    OriginContact,
    lemma1_preconditions,
    minmax_verify,
    quadratic_form_arg,
)
from .sampling import SampleSpec, draw_pair

SCHEMA_VERSION = 1
CHECKS = ("T1", "T2", "L1", "L2", "reduction")
OUTCOMES = ("pass", "fail", "vacuous", "boundary", "skipped")
MAX_RECORDED_FAILURES = 100


class ConfigInvalid(UnitargError, ValueError):
    pass


@dataclass(frozen=True)
class TrialCampaign:
    spec: SampleSpec
    trials: int
    checks: tuple[str, ...] = ("T1", "T2")
    profile: ToleranceProfile | None = None
    seed: int = 0
    minmax_trials: int = 10

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigInvalid(f"trials must be a positive integer, got {self.trials!r}")
        if not self.checks:
            raise ConfigInvalid("at least one check is required")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise ConfigInvalid(f"unknown checks {bad}; expected a subset of {CHECKS}")
        if self.minmax_trials < 0:
            raise ConfigInvalid("minmax_trials must be >= 0")

    def resolved_profile(self) -> ToleranceProfile:
        return self.profile or ToleranceProfile.for_dim(self.spec.n)

    def sample_spec(self) -> SampleSpec:
        return replace(self.spec, seed=self.seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec": self.sample_spec().to_dict(),
            "trials": self.trials,
            "checks": list(self.checks),
            "profile": self.resolved_profile().to_dict(),
            "seed": self.seed,
            "minmax_trials": self.minmax_trials,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TrialCampaign:
        try:
            spec_d = dict(d["spec"])
            if spec_d.get("spectrum") is not None:
                spec_d["spectrum"] = tuple(spec_d["spectrum"])
            profile = d.get("profile")
            return cls(
                spec=SampleSpec(**spec_d),
                trials=d["trials"],
                checks=tuple(d.get("checks", ("T1", "T2"))),
                profile=ToleranceProfile.from_dict(profile) if profile else None,
                seed=int(d.get("seed", spec_d.get("seed", 0))),
                minmax_trials=int(d.get("minmax_trials", 10)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigInvalid):
                raise
            raise ConfigInvalid(f"bad campaign config: {exc}") from exc


@dataclass
class CheckStats:
    counts: dict[str, int] = field(default_factory=lambda: dict.fromkeys(OUTCOMES, 0))
    worst_slack: float | None = None
    worst_trial: int | None = None
    eq_evaluated: int = 0
    eq_consistent: int = 0

    def add(self, trial: int, rec: dict[str, Any]) -> None:
        self.counts[rec["outcome"]] += 1
        w = rec.get("worst")
        if w is not None and (self.worst_slack is None or w < self.worst_slack):
            self.worst_slack, self.worst_trial = w, trial
        self.eq_evaluated += rec.get("eq_evaluated", 0)
        self.eq_consistent += rec.get("eq_consistent", 0)

    def to_dict(self) -> dict[str, Any]:
        rate = self.eq_consistent / self.eq_evaluated if self.eq_evaluated else None
        return {
            **self.counts,
            "worst_slack": self.worst_slack,
            "worst_trial": self.worst_trial,
            "equality_consistency": rate,
        }


@dataclass
class CampaignSummary:
    campaign: TrialCampaign
    checks: dict[str, CheckStats]
    failures: list[dict[str, Any]]
    wall_time: float = 0.0

    @property
    def total_failures(self) -> int:
        return sum(s.counts["fail"] for s in self.checks.values())

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        d = {
            "schema": SCHEMA_VERSION,
            "campaign": self.campaign.to_dict(),
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
            "failures": self.failures,
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)


def _substream_seed(seed: int, trial: int, j: int) -> int:
    ss = np.random.SeedSequence([int(seed) & ((1 << 64) - 1), trial, j, 0x4C32])
    return int(ss.generate_state(1, np.uint64)[0])


def _check_t1(u, v, su, sv, suv, profile, verbose):
    desc, asc = theorem1_check(u, v, profile, sys_u=su, sys_v=sv, sys_uv=suv)
    detail = {"reports": [desc.to_dict(), asc.to_dict()]} if verbose else {}
    if not desc.preconditions_ok:
        return {"outcome": "skipped", "worst": None, **detail}
    tol = profile.tol_eq
    worst = min(desc.slack, asc.slack)
    statuses = {desc.status, asc.status}
    if worst < -tol or "inconsistent" in statuses:
        outcome = "fail"
    elif "boundary" in statuses:
        outcome = "boundary"
    else:
        outcome = "pass"
    return {"outcome": outcome, "worst": worst, "eq_evaluated": 2,
            "eq_consistent": int(desc.consistent) + int(asc.consistent), **detail}


def _check_t2(u, v, su, sv, suv, profile, verbose):
    r = theorem2_check(u, v, profile, sys_u=su, sys_v=sv, sys_uv=suv)
    detail = {"reports": [r.to_dict()]} if verbose else {}
    tol = profile.tol_eq
    if r.slack < -tol or r.status == "inconsistent":
        outcome = "fail"
    elif r.status == "boundary" or r.boundary:
        outcome = "boundary"
    elif r.vacuous:
        outcome = "vacuous"
    else:
        outcome = "pass"
    return {"outcome": outcome, "worst": r.slack, "eq_evaluated": 1,
            "eq_consistent": int(r.consistent), **detail}


def _check_l1(u, v, su, sv, suv, profile, verbose):
    if not lemma1_preconditions(su, sv):
        return {"outcome": "skipped", "worst": None}
    rows = []
    worst_res = 0.0
    try:
        for j in range(1, suv.n + 1):
            k = int(suv.perm_desc[j - 1])
            w = suv.vectors[:, k]
            arg_u = quadratic_form_arg(u, w, profile)
            arg_v = quadratic_form_arg(v, w, profile)
            theta = float(suv.angles[k])
            res = arg_u + arg_v - theta
            worst_res = max(worst_res, abs(res))
            rows.append({"j": j, "arg_u": arg_u, "arg_v": arg_v, "theta": theta, "residual": res})
    except OriginContact as exc:
        return {"outcome": "fail", "worst": None, "error": str(exc)}
    detail = {"rows": rows} if verbose else {}
    outcome = "fail" if worst_res > profile.tol_eq else "pass"
    return {"outcome": outcome, "worst": -worst_res, **detail}


def _check_l2(u, v, su, sv, suv, profile, verbose, *, seed, trial, minmax_trials):
    if not su.spread < math.pi:
        return {"outcome": "skipped", "worst": None}
    worst = math.inf
    ok = True
    reports = []
    for j in range(1, su.n + 1):
        r = minmax_verify(u, j, minmax_trials, _substream_seed(seed, trial, j), profile, sys_u=su)
        ok = ok and r.ok
        worst = min(worst, -abs(r.extremizer_max_arg - r.theta_j))
        if r.worst_margin is not None:
            worst = min(worst, r.worst_margin)
        reports.append(r.to_dict())
    detail = {"reports": reports} if verbose else {}
    return {"outcome": "pass" if ok else "fail", "worst": worst, **detail}


def _check_reduction(u, v, su, sv, suv, profile, verbose):
    case = classify_case(su, sv, profile.tol_eq)
    if case not in (CaseLabel.CASE_II, CaseLabel.CASE_III):
        return {"outcome": "skipped", "worst": None}
    audit = reduction_audit(u, v, profile, sys_u=su, sys_v=sv, sys_uv=suv)
    detail = {"audit": audit.to_dict()} if verbose else {}
    return {"outcome": "pass" if audit.ok else "fail",
            "worst": min(audit.first_slack, audit.second_slack), **detail}


def run_trial(campaign: TrialCampaign, trial: int, checks=None,
              verbose: bool = False) -> dict[str, dict[str, Any]]:
    """Outcome record per check for one trial."""
    profile = campaign.resolved_profile()
    u, v = draw_pair(campaign.sample_spec(), trial, profile)
    su, sv = eig_unitary(u, profile), eig_unitary(v, profile)
    suv = eig_unitary(compose(u, v, profile), profile)
    out: dict[str, dict[str, Any]] = {}
    for c in checks or campaign.checks:
        args = (u, v, su, sv, suv, profile, verbose)
        try:
            if c == "T1":
                rec = _check_t1(*args)
            elif c == "T2":
                rec = _check_t2(*args)
            elif c == "L1":
                rec = _check_l1(*args)
            elif c == "L2":
                rec = _check_l2(*args, seed=campaign.seed, trial=trial,
                                minmax_trials=campaign.minmax_trials)
            else:
                rec = _check_reduction(*args)
        except UnitargError as exc:
            rec = {"outcome": "fail", "worst": None, "error": f"{type(exc).__name__}: {exc}"}
        out[c] = rec
    return out


def _run_chunk(args):
    campaign, trials = args
    return [(t, run_trial(campaign, t)) for t in trials]


def run_campaign(campaign: TrialCampaign, workers: int = 1) -> CampaignSummary:
    """Run every trial; the summary does not depend on ``workers``."""
    if not isinstance(campaign, TrialCampaign):
        raise ConfigInvalid("expected a TrialCampaign")
    start = time.perf_counter()
    indices = range(campaign.trials)
    if workers > 1:
        size = max(1, campaign.trials // (workers * 4))
        chunks = [(campaign, list(indices[i:i + size])) for i in range(0, campaign.trials, size)]
        with ProcessPoolExecutor(workers) as ex:
            results = [r for chunk in ex.map(_run_chunk, chunks) for r in chunk]
    else:
        results = _run_chunk((campaign, indices))
    results.sort(key=lambda tr: tr[0])

    stats = {c: CheckStats() for c in campaign.checks}
    failures: list[dict[str, Any]] = []
    for t, recs in results:
        for c, rec in recs.items():
            stats[c].add(t, rec)
            if rec["outcome"] == "fail" and len(failures) < MAX_RECORDED_FAILURES:
                failures.append({"seed": campaign.seed, "trial": t, "check": c,
                                 "worst": rec.get("worst"), "error": rec.get("error")})
    return CampaignSummary(campaign, stats, failures, time.perf_counter() - start)


def replay(campaign: TrialCampaign, trial_index: int, check: str) -> dict[str, Any]:
    """Regenerate one trial and re-run a single check with full detail."""
    if check not in CHECKS:
        raise ConfigInvalid(f"unknown check {check!r}; expected one of {CHECKS}")
    if not isinstance(trial_index, int) or trial_index < 0:
        raise ConfigInvalid("trial_index must be a non-negative integer")
    rec = run_trial(campaign, trial_index, checks=(check,), verbose=True)[check]
    return {"schema": SCHEMA_VERSION, "seed": campaign.seed, "trial": trial_index,
            "check": check, **rec}
