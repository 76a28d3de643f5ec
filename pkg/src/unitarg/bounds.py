"""The two product-argument bounds as executable checks.

``theorem1_check`` tests top(UV) <= top(U) + top(V) and the mirrored bound on
the bottom angles, under the preconditions top(U)+top(V) <= pi and
bottom(U)+bottom(V) > -pi. ``theorem2_check`` tests the unconditional bound
on largest absolute angles. Both predict the equality case from eigenspace
intersections and compare that prediction with the observed slack.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    TWO_PI,
    AmbientMismatch,
    EigenSystem,
    Subspace,
    ToleranceProfile,
    UnitargError,
    UnitaryMatrix,
    compose,
    resolve_profile,
)
from .eig import eig_unitary, inverse_angle_map, top_eigenspace
from .spectral import a_interval, fractional_power, pick_a


class CaseLabel(str, enum.Enum):
    CASE_I = "case_i"
    CASE_II = "case_ii"
    CASE_III = "case_iii"
    PRECONDITIONS_VIOLATED = "preconditions_violated"


class NotReducibleCase(UnitargError, ValueError):
    pass


def theorem1_preconditions(sys_u: EigenSystem, sys_v: EigenSystem, tol: float = 0.0) -> bool:
    """top(U)+top(V) <= pi (within ``tol``) and bottom(U)+bottom(V) > -pi."""
    return (sys_u.top + sys_v.top <= math.pi + tol
            and sys_u.bottom + sys_v.bottom > -math.pi)


def classify_case(sys_u: EigenSystem, sys_v: EigenSystem, tol: float = 0.0) -> CaseLabel:
    if not theorem1_preconditions(sys_u, sys_v, tol):
        return CaseLabel.PRECONDITIONS_VIOLATED
    if sys_u.spread >= math.pi:
        return CaseLabel.CASE_II
    if sys_v.spread >= math.pi:
        return CaseLabel.CASE_III
    return CaseLabel.CASE_I


def principal_cosines(s1: Subspace, s2: Subspace) -> np.ndarray:
    """Cosines of the principal angles, descending."""
    if s1.ambient_dim != s2.ambient_dim:
        raise AmbientMismatch(f"C^{s1.ambient_dim} vs C^{s2.ambient_dim}")
    if s1.dim == 0 or s2.dim == 0:
        return np.empty(0)
    s = np.linalg.svd(s1.basis.conj().T @ s2.basis, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def subspace_intersection_dim(s1: Subspace, s2: Subspace,
                              profile: ToleranceProfile | None = None) -> int:
    """Number of principal angles that are numerically zero."""
    profile = resolve_profile(profile, s1.ambient_dim)
    cos = principal_cosines(s1, s2)
    return int(np.sum(cos >= 1.0 - profile.tol_principal_angle))


def _near_threshold(cos: np.ndarray, tol_pa: float) -> bool:
    if cos.size == 0:
        return False
    return bool(np.any(np.abs((1.0 - cos) - tol_pa) <= 10.0 * tol_pa))


def _window_angles(sys: EigenSystem, tol_cluster: float) -> tuple[np.ndarray, bool]:
    """Angles of a product known to lie in (-pi, pi]: values within
    ``tol_cluster`` above -pi are the numerically blurred eigenvalue -1 and are
    read on the +pi side."""
    a = np.asarray(sys.angles)
    low = a < -math.pi + tol_cluster
    if not np.any(low):
        return a, False
    return np.where(low, a + TWO_PI, a), True


@dataclass
class BoundReport:
    theorem: str
    lhs: float
    rhs: float
    slack: float
    preconditions_ok: bool
    case: str
    equality_detected: bool
    intersection_dim: int
    equality_condition_predicted: bool
    consistent: bool
    boundary: bool = False
    vacuous: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if not self.preconditions_ok:
            return "precondition_skipped"
        if self.consistent:
            return "consistent"
        return "boundary" if self.boundary else "inconsistent"

    def holds(self, tol: float) -> bool:
        return (not self.preconditions_ok) or self.slack >= -tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status
        return d


def _equality_verdict(slack_for_eq: float, predicted: bool, cos: np.ndarray,
                      profile: ToleranceProfile) -> tuple[bool, bool, bool]:
    detected = abs(slack_for_eq) <= profile.tol_eq
    consistent = detected == predicted
    boundary = (not consistent) and (
        abs(abs(slack_for_eq) - profile.tol_eq) <= 10.0 * profile.tol_eq
        or _near_threshold(cos, profile.tol_principal_angle))
    return detected, consistent, boundary


def _systems(u, v, profile, sys_u, sys_v, sys_uv):
    sys_u = sys_u or eig_unitary(u, profile)
    sys_v = sys_v or eig_unitary(v, profile)
    sys_uv = sys_uv or eig_unitary(compose(u, v, profile), profile)
    return sys_u, sys_v, sys_uv


def theorem1_check(u: UnitaryMatrix, v: UnitaryMatrix,
                   profile: ToleranceProfile | None = None, *,
                   sys_u: EigenSystem | None = None,
                   sys_v: EigenSystem | None = None,
                   sys_uv: EigenSystem | None = None) -> tuple[BoundReport, BoundReport]:
    """Descending and ascending reports for the conditional product bound.

    Slack is oriented so that slack >= 0 means the bound holds in both reports.
    """
    profile = resolve_profile(profile, u.dim)
    sys_u, sys_v, sys_uv = _systems(u, v, profile, sys_u, sys_v, sys_uv)
    case = classify_case(sys_u, sys_v, profile.tol_eq)
    ok = case is not CaseLabel.PRECONDITIONS_VIOLATED

    notes: list[str] = []
    if ok:
        uv_angles, lifted = _window_angles(sys_uv, profile.tol_cluster)
        if lifted:
            notes.append("product eigenvalue at -1 read as angle +pi")
    else:
        uv_angles = np.asarray(sys_uv.angles)
    if abs(sys_u.top + sys_v.top - math.pi) <= profile.tol_eq:
        notes.append("top-angle sum at pi")

    inv_u = inverse_angle_map(sys_u, profile)
    inv_v = inverse_angle_map(sys_v, profile)
    cos_desc = principal_cosines(top_eigenspace(sys_u), top_eigenspace(sys_v))
    cos_asc = principal_cosines(top_eigenspace(inv_u), top_eigenspace(inv_v))
    tol_pa = profile.tol_principal_angle
    dim_desc = int(np.sum(cos_desc >= 1.0 - tol_pa))
    dim_asc = int(np.sum(cos_asc >= 1.0 - tol_pa))

    reports = []
    for name, lhs, rhs, dim, cos in (
        ("T1_desc", float(uv_angles.max()), sys_u.top + sys_v.top, dim_desc, cos_desc),
        ("T1_asc", sys_u.bottom + sys_v.bottom, float(uv_angles.min()), dim_asc, cos_asc),
    ):
        slack = rhs - lhs
        predicted = dim >= 1
        detected, consistent, boundary = _equality_verdict(slack, predicted, cos, profile)
        reports.append(BoundReport(
            theorem=name, lhs=lhs, rhs=rhs, slack=slack, preconditions_ok=ok,
            case=case.value, equality_detected=detected, intersection_dim=dim,
            equality_condition_predicted=predicted, consistent=consistent,
            boundary=boundary, notes=list(notes),
        ))
    return reports[0], reports[1]


def theorem2_check(u: UnitaryMatrix, v: UnitaryMatrix,
                   profile: ToleranceProfile | None = None, *,
                   sys_u: EigenSystem | None = None,
                   sys_v: EigenSystem | None = None,
                   sys_uv: EigenSystem | None = None) -> BoundReport:
    """Report for |angle|max(UV) <= |angle|max(U) + |angle|max(V).

    When the right side reaches pi the bound is vacuous; slack is then taken
    against pi, while equality is still judged on the raw difference.
    """
    profile = resolve_profile(profile, u.dim)
    sys_u, sys_v, sys_uv = _systems(u, v, profile, sys_u, sys_v, sys_uv)
    tol = profile.tol_eq
    tol_pa = profile.tol_principal_angle

    lhs = sys_uv.top_abs
    au, av = sys_u.top_abs, sys_v.top_abs
    rhs = au + av
    vacuous = rhs >= math.pi
    slack = min(rhs, math.pi) - lhs
    raw_slack = rhs - lhs

    inv_u = inverse_angle_map(sys_u, profile)
    inv_v = inverse_angle_map(sys_v, profile)
    cos_desc = principal_cosines(top_eigenspace(sys_u), top_eigenspace(sys_v))
    cos_asc = principal_cosines(top_eigenspace(inv_u), top_eigenspace(inv_v))
    dim_desc = int(np.sum(cos_desc >= 1.0 - tol_pa))
    dim_asc = int(np.sum(cos_asc >= 1.0 - tol_pa))

    sign_a = abs(sys_u.top - au) <= tol and abs(sys_v.top - av) <= tol
    sign_b = abs(sys_u.bottom + au) <= tol and abs(sys_v.bottom + av) <= tol
    cond_1 = rhs <= math.pi + tol
    cond_pos = sign_a and dim_desc >= 1
    cond_neg = sign_b and dim_asc >= 1
    predicted = cond_1 and (cond_pos or cond_neg)

    if cond_pos or (sign_a and not sign_b):
        dim, cos = dim_desc, cos_desc
    elif cond_neg or sign_b:
        dim, cos = dim_asc, cos_asc
    else:
        dim, cos = max(dim_desc, dim_asc), np.concatenate([cos_desc, cos_asc])

    detected, consistent, boundary = _equality_verdict(raw_slack, predicted, cos, profile)
    notes = []
    if cond_pos:
        notes.append("equality via shared top eigenvector, both tops positive")
    if cond_neg:
        notes.append("equality via shared bottom eigenvector, both bottoms negative")
    if abs(rhs - math.pi) <= tol:
        notes.append("right side at pi")
        boundary = True
    return BoundReport(
        theorem="T2", lhs=lhs, rhs=rhs, slack=slack, preconditions_ok=True,
        case=classify_case(sys_u, sys_v, tol).value,
        equality_detected=detected, intersection_dim=dim,
        equality_condition_predicted=predicted, consistent=consistent,
        boundary=boundary, vacuous=vacuous, notes=notes,
    )


@dataclass
class ReductionAudit:
    case: str
    a: float
    interval: tuple[float, float]
    a_inside: bool
    first_pair_case: str
    second_pair_case: str
    first_slack: float
    second_slack: float
    chained_slack: float
    direct_slack: float
    sign_agrees: bool

    @property
    def ok(self) -> bool:
        return (self.a_inside and self.sign_agrees
                and self.first_pair_case == CaseLabel.CASE_I.value
                and self.second_pair_case == CaseLabel.CASE_I.value)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["interval"] = list(self.interval)
        d["ok"] = self.ok
        return d


def _top_in_window(sys: EigenSystem, tol_cluster: float) -> float:
    a, _ = _window_angles(sys, tol_cluster)
    return float(a.max())


def reduction_audit(u: UnitaryMatrix, v: UnitaryMatrix,
                    profile: ToleranceProfile | None = None, *,
                    sys_u: EigenSystem | None = None,
                    sys_v: EigenSystem | None = None,
                    sys_uv: EigenSystem | None = None) -> ReductionAudit:
    """Replay the fractional-power splitting that reduces a wide-spread pair to case (i).

    Case (ii), U wide:   UV = U^(1-a) (U^a V)
    Case (iii), V wide:  UV = (U V^a) V^(1-a)
    Each factor pair is re-classified and its descending bound evaluated; the
    two slacks add up to the direct slack.
    """
    profile = resolve_profile(profile, u.dim)
    sys_u, sys_v, sys_uv = _systems(u, v, profile, sys_u, sys_v, sys_uv)
    tol = profile.tol_eq
    tc = profile.tol_cluster
    case = classify_case(sys_u, sys_v, tol)
    if case not in (CaseLabel.CASE_II, CaseLabel.CASE_III):
        raise NotReducibleCase(f"pair is {case.value}; reduction applies to case_ii/case_iii")

    def eig_of(m):
        return eig_unitary(m, profile)

    if case is CaseLabel.CASE_II:
        sys_wide, sys_narrow = sys_u, sys_v
    else:
        sys_wide, sys_narrow = sys_v, sys_u
    a = pick_a(sys_wide, sys_narrow)
    lo, hi = a_interval(sys_wide, sys_narrow)
    w_a = fractional_power(sys_wide, a, profile)
    w_rest = fractional_power(sys_wide, 1.0 - a, profile)
    s_a, s_rest = eig_of(w_a), eig_of(w_rest)

    if case is CaseLabel.CASE_II:
        inner = compose(w_a, v, profile)                 # U^a V
        s_inner = eig_of(inner)
        first = classify_case(s_a, sys_v, tol)
        second = classify_case(s_rest, s_inner, tol)
    else:
        inner = compose(u, w_a, profile)                 # U V^a
        s_inner = eig_of(inner)
        first = classify_case(sys_u, s_a, tol)
        second = classify_case(s_inner, s_rest, tol)

    inner_top = _top_in_window(s_inner, tc)
    first_slack = s_a.top + sys_narrow.top - inner_top
    uv_top = _top_in_window(sys_uv, tc)
    second_slack = s_rest.top + inner_top - uv_top
    chained = first_slack + second_slack
    direct = sys_u.top + sys_v.top - uv_top
    sign_agrees = (first_slack >= -tol and second_slack >= -tol
                   and (chained >= -tol) == (direct >= -tol))
    return ReductionAudit(
        case=case.value, a=a, interval=(lo, hi), a_inside=lo < a < hi and 0.0 < a < 1.0,
        first_pair_case=first.value, second_pair_case=second.value,
        first_slack=first_slack, second_slack=second_slack,
        chained_slack=chained, direct_slack=direct, sign_agrees=sign_agrees,
    )
