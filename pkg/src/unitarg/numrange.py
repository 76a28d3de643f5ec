"""Argument geometry of quadratic forms <psi|U|psi>.

The numerical range of a normal matrix is the convex hull of its eigenvalues.
When the eigenangles of U span less than pi that hull avoids the origin, so
arg<psi|U|psi> is bounded by the extreme eigenangles and the arguments of a
product split additively over the factors.
"""

from __future__ import annotations

import cmath
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (
    TWO_PI,
    EigenSystem,
    IndexOutOfRange,
    Subspace,
    ToleranceProfile,
    UnitargError,
    UnitaryMatrix,
    AmbientMismatch,
    compose,
    principal_value,
    resolve_profile,
)
from .eig import eig_unitary, tail_subspace

N_PROBES = 360
REFINE_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class OriginContact(UnitargError, ArithmeticError):
    """The quadratic form (or numerical range) reaches the origin; arg undefined."""


class SpreadPreconditionViolated(UnitargError, ValueError):
    pass


class DegenerateAmbiguity(UserWarning):
    """The queried eigenket of UV lies in a degenerate eigenspace."""


@dataclass(frozen=True, eq=False)
class ArgRange:
    min_arg: float
    max_arg: float
    attained_min_vector: np.ndarray | None = None
    attained_max_vector: np.ndarray | None = None


def quadratic_form_arg(u: UnitaryMatrix, psi, profile: ToleranceProfile | None = None) -> float:
    """arg<psi|U|psi> in (-pi, pi]."""
    profile = resolve_profile(profile, u.dim)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape[0] != u.dim:
        raise AmbientMismatch(f"vector length {psi.shape[0]} != {u.dim}")
    if abs(np.linalg.norm(psi) - 1.0) > profile.tol_ortho:
        raise ValueError("psi must be a unit vector")
    z = np.vdot(psi, u.entries @ psi)
    if abs(z) < profile.tol_eq:
        raise OriginContact(f"|<psi|U|psi>| = {abs(z):.3e}")
    return principal_value(np.angle(z))


class ProductPhase(NamedTuple):
    arg_u: float
    arg_v: float
    theta: float
    degenerate: bool


def lemma1_preconditions(sys_u: EigenSystem, sys_v: EigenSystem) -> bool:
    return (sys_u.spread < math.pi and sys_v.spread < math.pi
            and sys_u.top + sys_v.top < math.pi
            and -sys_u.bottom - sys_v.bottom < math.pi)


def product_phase_decomposition(u: UnitaryMatrix, v: UnitaryMatrix, j: int,
                                profile: ToleranceProfile | None = None,
                                *, sys_u: EigenSystem | None = None,
                                sys_v: EigenSystem | None = None,
                                sys_uv: EigenSystem | None = None) -> ProductPhase:
    """Split the j-th descending eigenangle of UV into arg<w|U|w> + arg<w|V|w>.

    No reduction modulo 2*pi is applied; under the spread preconditions the
    plain sum is exact.
    """
    profile = resolve_profile(profile, u.dim)
    sys_u = sys_u or eig_unitary(u, profile)
    sys_v = sys_v or eig_unitary(v, profile)
    if not lemma1_preconditions(sys_u, sys_v):
        raise SpreadPreconditionViolated(
            "need spread(U), spread(V), top(U)+top(V), -bottom(U)-bottom(V) all < pi"
        )
    if sys_uv is None:
        sys_uv = eig_unitary(compose(u, v, profile), profile)
    if not 1 <= j <= sys_uv.n:
        raise IndexOutOfRange(f"index {j} outside 1..{sys_uv.n}")
    k = int(sys_uv.perm_desc[j - 1])
    degenerate = len(sys_uv.cluster_of(k)) > 1
    if degenerate:
        warnings.warn(f"eigenangle {j} of UV is degenerate; eigenket choice is basis-dependent",
                      DegenerateAmbiguity, stacklevel=2)
    w = sys_uv.vectors[:, k]
    arg_u = quadratic_form_arg(u, w, profile)
    arg_v = quadratic_form_arg(v, w, profile)
    return ProductPhase(arg_u, arg_v, float(sys_uv.angles[k]), degenerate)


def _support_points(a: np.ndarray, phis: np.ndarray):
    """Boundary points of W(a) with outward normal direction phi, and support values."""
    rot = np.exp(-1j * phis)[:, None, None]
    h = 0.5 * (rot * a + (rot * a).conj().transpose(0, 2, 1))
    w, x = np.linalg.eigh(h)
    top = x[:, :, -1]
    p = np.einsum("mi,ij,mj->m", top.conj(), a, top)
    return p, w[:, -1], top


def _golden(f, lo: float, hi: float, tol: float):
    """Maximize unimodal ``f`` on [lo, hi]; returns (x, f(x))."""
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def compression_arg_range(a: np.ndarray, tol_eq: float, *, refine_min: bool = True):
    """Extremal arguments over the numerical range of a square matrix ``a``.

    Returns (min_arg, max_arg, x_min, x_max) with x_* unit vectors attaining
    them. Arguments are measured continuously around the direction of
    trace(a), so a range that touches the negative real axis from above stays
    on the +pi side. With ``refine_min=False`` the minimum is left at probe
    resolution.
    """
    k = a.shape[0]
    if k == 1:
        z = a[0, 0]
        if abs(z) < tol_eq:
            raise OriginContact(f"|compression| = {abs(z):.3e}")
        t = float(principal_value(np.angle(z)))
        e = np.ones(1, dtype=complex)
        return t, t, e, e

    phis = np.linspace(-math.pi, math.pi, N_PROBES, endpoint=False)
    p, h, xs = _support_points(a, phis)
    dist = -float(h.min())
    if dist < tol_eq:
        raise OriginContact(f"numerical range within {max(dist, 0.0):.3e} of the origin")

    center = cmath.phase(np.trace(a))
    args = center + principal_value(np.angle(p) - center)
    step = phis[1] - phis[0]
    a_h = a.conj().T

    def point(phi):
        r = cmath.exp(-1j * phi)
        _, x = np.linalg.eigh(0.5 * (r * a + r.conjugate() * a_h))
        top = x[:, -1]
        return top.conj() @ a @ top, top

    def rel_arg(z):
        d = cmath.phase(z) - center
        if d > math.pi:
            d -= TWO_PI
        elif d <= -math.pi:
            d += TWO_PI
        return center + d

    def refine(sign: float, m: int):
        best_phi, best = _golden(lambda phi: sign * rel_arg(point(phi)[0]),
                                 phis[m] - step, phis[m] + step, REFINE_TOL)
        if best >= sign * args[m]:
            return sign * best, point(best_phi)[1]
        return float(args[m]), xs[m]

    hi, x_hi = refine(1.0, int(np.argmax(args)))
    if refine_min:
        lo, x_lo = refine(-1.0, int(np.argmin(args)))
    else:
        m = int(np.argmin(args))
        lo, x_lo = float(args[m]), xs[m]
    return lo, hi, x_lo, x_hi


def max_arg_on_subspace(u: UnitaryMatrix, sub: Subspace,
                        profile: ToleranceProfile | None = None,
                        *, sys_u: EigenSystem | None = None,
                        refine_min: bool = True) -> ArgRange:
    """Max and min of arg<psi|U|psi> over unit psi in ``sub``."""
    profile = resolve_profile(profile, u.dim)
    if sub.ambient_dim != u.dim:
        raise AmbientMismatch(f"subspace lives in C^{sub.ambient_dim}, matrix is {u.dim}x{u.dim}")
    if sub.dim < 1:
        raise ValueError("subspace must have dimension >= 1")
    sys_u = sys_u or eig_unitary(u, profile)
    if not sys_u.spread < math.pi:
        raise SpreadPreconditionViolated(f"spread(U) = {sys_u.spread:.6g} is not < pi")
    b = sub.basis
    a = b.conj().T @ u.entries @ b
    lo, hi, x_lo, x_hi = compression_arg_range(a, profile.tol_eq, refine_min=refine_min)
    # rounding guard for ranges pinned at the +pi edge
    hi = min(hi, math.pi)
    lo = min(lo, hi)
    return ArgRange(lo, hi, b @ x_lo, b @ x_hi)


def random_codim_subspace(n: int, codim: int, rng: np.random.Generator) -> Subspace:
    """Haar-distributed subspace of C^n with the given codimension."""
    from .sampling import haar_matrix
    q = haar_matrix(n, rng)
    return Subspace(q[:, codim:])


@dataclass
class MinmaxReport:
    j: int
    theta_j: float
    extremizer_max_arg: float
    extremizer_ok: bool
    trials: int
    n_ok: int
    worst_margin: float | None
    oracle_samples: int = 0
    oracle_ok: bool = True
    failing_trials: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.extremizer_ok and self.n_ok == self.trials and self.oracle_ok

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "theta_j": self.theta_j,
            "extremizer_max_arg": self.extremizer_max_arg,
            "extremizer_ok": self.extremizer_ok,
            "trials": self.trials,
            "n_ok": self.n_ok,
            "worst_margin": self.worst_margin,
            "oracle_samples": self.oracle_samples,
            "oracle_ok": self.oracle_ok,
            "failing_trials": list(self.failing_trials),
            "ok": self.ok,
        }


def minmax_verify(u: UnitaryMatrix, j: int, trials: int, rng_seed: int,
                  profile: ToleranceProfile | None = None, *,
                  sys_u: EigenSystem | None = None,
                  oracle_samples: int = 0,
                  workers: int = 1) -> MinmaxReport:
    """Check the min-max characterization of the j-th descending eigenangle.

    The tail eigenspace j..n must reach exactly theta_j, and every sampled
    subspace of codimension j-1 must reach at least theta_j. With
    ``oracle_samples`` > 0, random unit vectors inside each subspace are also
    checked never to exceed the swept maximum.
    """
    from .sampling import trial_rng

    profile = resolve_profile(profile, u.dim)
    sys_u = sys_u or eig_unitary(u, profile)
    n = sys_u.n
    if not 1 <= j <= n:
        raise IndexOutOfRange(f"index {j} outside 1..{n}")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    theta_j = float(sys_u.desc[j - 1])
    tol = profile.tol_eq

    ext = max_arg_on_subspace(u, tail_subspace(sys_u, j), profile, sys_u=sys_u)
    extremizer_ok = abs(ext.max_arg - theta_j) <= tol

    def one(t: int):
        rng = trial_rng(rng_seed, t)
        sub = random_codim_subspace(n, j - 1, rng)
        r = max_arg_on_subspace(u, sub, profile, sys_u=sys_u, refine_min=False)
        oracle_ok = True
        if oracle_samples:
            c = rng.standard_normal((sub.dim, oracle_samples)) \
                + 1j * rng.standard_normal((sub.dim, oracle_samples))
            psi = sub.basis @ (c / np.linalg.norm(c, axis=0))
            z = np.einsum("ij,ij->j", psi.conj(), u.entries @ psi)
            center = 0.5 * (r.max_arg + r.min_arg)
            sampled = center + principal_value(np.angle(z) - center)
            oracle_ok = bool(sampled.max() <= r.max_arg + tol)
        return r.max_arg - theta_j, oracle_ok

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]

    margins = [m for m, _ in results]
    failing = [t for t, (m, _) in enumerate(results) if m < -tol]
    return MinmaxReport(
        j=j,
        theta_j=theta_j,
        extremizer_max_arg=ext.max_arg,
        extremizer_ok=extremizer_ok,
        trials=trials,
        n_ok=trials - len(failing),
        worst_margin=min(margins) if margins else None,
        oracle_samples=oracle_samples,
        oracle_ok=all(ok for _, ok in results),
        failing_trials=failing,
    )
