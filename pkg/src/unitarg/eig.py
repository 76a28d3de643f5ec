"""Eigendecomposition of unitary matrices with degeneracy clustering."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    TWO_PI,
    ConvergenceFailure,
    EigenSystem,
    IndexOutOfRange,
    Subspace,
    ToleranceProfile,
    UnitaryMatrix,
    _readonly,
    op_norm,
    principal_value,
    resolve_profile,
)


class Order(str, enum.Enum):
    DESCENDING = "descending"
    ASCENDING = "ascending"
    ABS_DESCENDING = "absolute-descending"


@dataclass(frozen=True)
class EigenspaceQuery:
    order: Order = Order.DESCENDING
    index: int = 1
    cluster: bool = False


def _orderings(angles: np.ndarray):
    desc = np.argsort(-angles, kind="stable")
    asc = np.argsort(angles, kind="stable")
    absdesc = np.argsort(-np.abs(angles), kind="stable")
    return desc, asc, absdesc


def cluster_angles(angles: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    """Single-linkage clusters of angles on the circle, gap threshold ``tol``.

    Eigenvalues just either side of the branch cut are joined, since they are
    neighbours on the unit circle.
    """
    n = len(angles)
    order = np.argsort(angles, kind="stable")
    srt = angles[order]
    groups: list[list[int]] = [[int(order[0])]]
    for k in range(1, n):
        if srt[k] - srt[k - 1] > tol:
            groups.append([])
        groups[-1].append(int(order[k]))
    if len(groups) > 1 and srt[0] + TWO_PI - srt[-1] <= tol:
        groups[0] = groups.pop() + groups[0]
    return tuple(tuple(sorted(g)) for g in sorted(groups, key=min))


def _build(angles, vectors, profile, recon_defect=0.0, branch_edge=False) -> EigenSystem:
    desc, asc, absdesc = _orderings(angles)
    return EigenSystem(
        angles=_readonly(angles),
        vectors=_readonly(vectors),
        perm_desc=_readonly(desc),
        perm_asc=_readonly(asc),
        perm_absdesc=_readonly(absdesc),
        clusters=cluster_angles(angles, profile.tol_cluster),
        recon_defect=recon_defect,
        branch_edge=branch_edge,
    )


def eig_unitary(u: UnitaryMatrix, profile: ToleranceProfile | None = None) -> EigenSystem:
    """Decompose ``u`` as sum_j exp(i*angle_j) |v_j><v_j|.

    A complex Schur form of a normal matrix is diagonal up to rounding, so the
    Schur vectors serve as eigenvectors. Eigenvalues are projected onto the unit
    circle before their arguments are taken.
    """
    a = np.asarray(u.entries)
    n = a.shape[0]
    profile = resolve_profile(profile, n)
    try:
        t, z = scipy.linalg.schur(a, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc

    lam = np.diag(t).copy()
    mod = np.abs(lam)
    if np.any(mod < 0.5):
        raise ConvergenceFailure("eigenvalue far from the unit circle")
    angles = principal_value(np.angle(lam / mod))
    angles = np.atleast_1d(angles)

    clusters = cluster_angles(angles, profile.tol_cluster)
    vectors = z.copy()
    for c in clusters:
        if len(c) > 1:
            idx = list(c)
            q, _ = np.linalg.qr(vectors[:, idx])
            vectors[:, idx] = q

    recon = (vectors * np.exp(1j * angles)) @ vectors.conj().T
    defect = op_norm(a - recon)
    if defect > profile.tol_recon:
        raise ConvergenceFailure(
            f"reconstruction defect {defect:.3e} exceeds {profile.tol_recon:.3e}; "
            "recondition the input or loosen tol_recon"
        )
    return _build(angles, vectors, profile, recon_defect=defect)


def _perm(sys: EigenSystem, order: Order) -> np.ndarray:
    return {
        Order.DESCENDING: sys.perm_desc,
        Order.ASCENDING: sys.perm_asc,
        Order.ABS_DESCENDING: sys.perm_absdesc,
    }[Order(order)]


def eigenspace(sys: EigenSystem, q: EigenspaceQuery,
               profile: ToleranceProfile | None = None) -> Subspace:
    """Eigenket (or its whole degenerate cluster) at ordered position ``q.index``."""
    if not 1 <= q.index <= sys.n:
        raise IndexOutOfRange(f"index {q.index} outside 1..{sys.n}")
    k = int(_perm(sys, q.order)[q.index - 1])
    idx = list(sys.cluster_of(k)) if q.cluster else [k]
    return Subspace(np.array(sys.vectors[:, idx]))


def top_eigenspace(sys: EigenSystem) -> Subspace:
    """Full eigenspace of the eigenvalue with the largest angle."""
    return eigenspace(sys, EigenspaceQuery(Order.DESCENDING, 1, cluster=True))


def tail_subspace(sys: EigenSystem, j: int) -> Subspace:
    """Direct sum of the descending eigenkets j..n (1-based)."""
    if not 1 <= j <= sys.n:
        raise IndexOutOfRange(f"index {j} outside 1..{sys.n}")
    return Subspace(np.array(sys.vectors[:, sys.perm_desc[j - 1:]]))


def inverse_angle_map(sys: EigenSystem, profile: ToleranceProfile | None = None) -> EigenSystem:
    """Eigen system of the inverse: negated angles, same eigenvectors."""
    profile = resolve_profile(profile, sys.n)
    angles = np.atleast_1d(principal_value(-np.asarray(sys.angles)))
    edge = bool(np.any(sys.angles == math.pi))
    return _build(angles, np.array(sys.vectors), profile,
                  recon_defect=sys.recon_defect, branch_edge=edge)
