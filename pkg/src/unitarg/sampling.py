"""Reproducible random unitaries and theorem-exercising pairs.

Every random draw goes through :func:`trial_rng`, a Philox stream keyed by
``(seed, trial_index)``, so any trial of a campaign can be regenerated alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    ToleranceProfile,
    UnitargError,
    UnitaryMatrix,
    make_unitary,
)

KINDS = ("haar", "fixed_spectrum", "case_targeted", "equality_planted", "gap_planted")
CASES = ("case_i", "case_ii", "case_iii")
_U64 = (1 << 64) - 1


class AngleOutOfRange(UnitargError, ValueError):
    pass


class InfeasibleAngles(UnitargError, ValueError):
    pass


class InfeasibleGap(UnitargError, ValueError):
    pass


def trial_rng(seed: int, trial_index: int = 0) -> np.random.Generator:
    """Independent counter-based stream for one trial."""
    ss = np.random.SeedSequence(int(seed) & _U64, spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.Philox(ss))


def haar_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of U(n) as a plain array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(n: int, rng: np.random.Generator,
                 profile: ToleranceProfile | None = None) -> UnitaryMatrix:
    return make_unitary(haar_matrix(n, rng), profile)


def _check_angles(angles) -> np.ndarray:
    a = np.asarray(angles, dtype=float).ravel()
    if a.size == 0:
        raise AngleOutOfRange("empty spectrum")
    if not np.all(np.isfinite(a)) or np.any(a <= -math.pi) or np.any(a > math.pi):
        raise AngleOutOfRange(f"angles must lie in (-pi, pi]: {a}")
    return a


def _synth(q: np.ndarray, angles: np.ndarray) -> np.ndarray:
    return (q * np.exp(1j * angles)) @ q.conj().T


def unitary_with_spectrum(angles: Sequence[float], rng: np.random.Generator,
                          profile: ToleranceProfile | None = None) -> UnitaryMatrix:
    """Q diag(exp(i*angles)) Q^dagger with Q Haar."""
    a = _check_angles(angles)
    return make_unitary(_synth(haar_matrix(a.size, rng), a), profile)


def _fill_below(top: float, lo: float, count: int, margin: float,
                rng: np.random.Generator, *, pin_bottom: bool = False) -> np.ndarray:
    """``count`` angles in (lo, top - margin); with pin_bottom one sits at ``lo`` exactly."""
    if count <= 0:
        return np.empty(0)
    hi = top - margin
    if not hi > lo:
        raise InfeasibleAngles(f"no room below top angle {top:.6g} (floor {lo:.6g})")
    xs = rng.uniform(lo, hi, size=count)
    if pin_bottom:
        xs[0] = lo
    return xs


def _complete_basis(v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Unitary whose first column is the unit vector ``v``; other columns random."""
    n = v.shape[0]
    q = haar_matrix(n, rng)
    q[:, 0] = v
    # Gram-Schmidt the remaining columns against v
    q, r = np.linalg.qr(q)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q


def case_spectra(n: int, case: str, rng: np.random.Generator,
                 margin: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Random spectra for U, V satisfying the product-bound preconditions in ``case``.

    Both factors have top(U)+top(V) <= pi and bottom(U)+bottom(V) > -pi; the
    spreads put the pair in case_i, case_ii (U wide) or case_iii (V wide).
    """
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    if case != "case_i" and n < 2:
        raise InfeasibleAngles("a spread of at least pi needs n >= 2")
    pi = math.pi
    if case == "case_i":
        s_wide = rng.uniform(0.0, pi - margin) if n > 1 else 0.0
    else:
        s_wide = rng.uniform(pi, 2 * pi - 4 * margin)
    s_other = rng.uniform(0.0, min(pi - margin, 2 * pi - s_wide - 2 * margin)) if n > 1 else 0.0
    # sum of the two top angles: must exceed s_wide + s_other - pi and be <= pi
    t_lo = s_wide + s_other - pi + margin
    total = rng.uniform(t_lo, pi)
    # split: top_w in (-pi + s_wide, pi], top_o = total - top_w in (-pi + s_other, pi]
    w_lo = max(-pi + s_wide, total - pi) + margin / 4
    w_hi = min(pi, total + pi - s_other) - margin / 4
    top_w = rng.uniform(w_lo, w_hi)
    top_o = total - top_w

    def spectrum(top, spread):
        if n == 1:
            return np.array([top])
        rest = rng.uniform(top - spread, top, size=n - 2)
        return np.concatenate([[top, top - spread], rest])

    wide, other = spectrum(top_w, s_wide), spectrum(top_o, s_other)
    if case == "case_iii":
        return other, wide
    return wide, other


def case_pair(n: int, case: str, rng: np.random.Generator,
              profile: ToleranceProfile | None = None) -> tuple[UnitaryMatrix, UnitaryMatrix]:
    """Independent Haar eigenbases carrying spectra drawn by :func:`case_spectra`."""
    au, av = case_spectra(n, case, rng)
    return unitary_with_spectrum(au, rng, profile), unitary_with_spectrum(av, rng, profile)


def _caps_case_i(theta_u: float, theta_v: float) -> tuple[float, float]:
    pi = math.pi
    cap = 0.95 * min(pi, (theta_u + theta_v + pi) / 2, theta_u + pi, theta_v + pi)
    return cap, cap


def equality_pair(n: int, theta_u: float, theta_v: float, rng: np.random.Generator,
                  profile: ToleranceProfile | None = None, *,
                  case_ii: bool = False) -> tuple[UnitaryMatrix, UnitaryMatrix]:
    """Pair whose top eigenspaces share a random unit vector.

    ``theta_u`` and ``theta_v`` become the top angles. The remaining angles sit
    strictly below them and keep top-sum <= pi, bottom-sum > -pi. By default
    both spreads stay below pi; ``case_ii=True`` widens U past pi instead.
    """
    pi = math.pi
    total = theta_u + theta_v
    for t in (theta_u, theta_v):
        if not -pi < t <= pi:
            raise InfeasibleAngles(f"top angle {t} outside (-pi, pi]")
    if total > pi or total <= -pi:
        raise InfeasibleAngles(f"top angles sum to {total:.6g}; need (-pi, pi]")
    q = haar_matrix(n, rng)
    top_vec = q[:, 0]
    q_v = _complete_basis(top_vec, rng)

    if not case_ii:
        cap_u, cap_v = _caps_case_i(theta_u, theta_v)
        m_u, m_v = min(0.05, cap_u / 4), min(0.05, cap_v / 4)
        au = np.concatenate([[theta_u], _fill_below(theta_u, theta_u - cap_u, n - 1, m_u, rng)])
        av = np.concatenate([[theta_v], _fill_below(theta_v, theta_v - cap_v, n - 1, m_v, rng)])
    else:
        if n < 2:
            raise InfeasibleAngles("case (ii) needs n >= 2")
        m = 0.02
        cap_hi = min(theta_u + pi, total + pi) - 3 * m
        if not cap_hi > pi:
            raise InfeasibleAngles(
                f"case (ii) needs theta_u > 0 and theta_u + theta_v > 0 with room; "
                f"got {theta_u:.6g}, {theta_v:.6g}")
        cap_u = rng.uniform(pi, cap_hi)
        bottom_u = theta_u - cap_u
        au = np.concatenate([[theta_u],
                             _fill_below(theta_u, bottom_u, n - 1, m, rng, pin_bottom=True)])
        floor_v = max(-pi, -pi - bottom_u) + m
        av = np.concatenate([[theta_v], _fill_below(theta_v, floor_v, n - 1, m, rng)])
    return (make_unitary(_synth(q, au), profile), make_unitary(_synth(q_v, av), profile))


def random_equality_pair(n: int, rng: np.random.Generator,
                         profile: ToleranceProfile | None = None, *,
                         case_ii: bool = False) -> tuple[UnitaryMatrix, UnitaryMatrix]:
    """:func:`equality_pair` with random admissible top angles."""
    pi = math.pi
    if case_ii:
        total = rng.uniform(0.5, pi)
        theta_u = rng.uniform(max(0.3, total - pi + 0.05), min(pi, total + 1.0))
    else:
        total = rng.uniform(-0.9 * pi, pi)
        theta_u = rng.uniform(max(-pi, total - pi) + 0.05, min(pi, total + pi) - 0.05)
    return equality_pair(n, theta_u, total - theta_u, rng, profile, case_ii=case_ii)


def gap_pair(n: int, principal_gap: float, rng: np.random.Generator,
             profile: ToleranceProfile | None = None) -> tuple[UnitaryMatrix, UnitaryMatrix]:
    """Case-(i) pair whose 1-D top eigenspaces meet at exactly ``principal_gap``."""
    if n < 2:
        raise InfeasibleGap("need n >= 2 for two distinct top directions")
    if not 0.0 < principal_gap <= math.pi / 2:
        raise InfeasibleGap(f"gap {principal_gap} outside (0, pi/2]")
    q = haar_matrix(n, rng)
    v_top = math.cos(principal_gap) * q[:, 0] + math.sin(principal_gap) * q[:, 1]
    q_v = _complete_basis(v_top, rng)
    total = rng.uniform(-0.5 * math.pi, 0.5 * math.pi)
    theta_u = rng.uniform(total / 2 - 0.5, total / 2 + 0.5)
    theta_v = total - theta_u
    cap_u, cap_v = _caps_case_i(theta_u, theta_v)
    au = np.concatenate([[theta_u], _fill_below(theta_u, theta_u - cap_u, n - 1, 0.05, rng)])
    av = np.concatenate([[theta_v], _fill_below(theta_v, theta_v - cap_v, n - 1, 0.05, rng)])
    return make_unitary(_synth(q, au), profile), make_unitary(_synth(q_v, av), profile)


@dataclass(frozen=True)
class SampleSpec:
    n: int
    kind: str = "haar"
    spectrum: tuple[float, ...] | None = None
    case_target: str | None = None
    planted_gap: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.spectrum is not None:
            _check_angles(self.spectrum)
            if len(self.spectrum) != self.n:
                raise ValueError("spectrum length must equal n")
        if self.kind == "fixed_spectrum" and self.spectrum is None:
            raise ValueError("fixed_spectrum needs a spectrum")
        if self.case_target is not None and self.case_target not in CASES:
            raise ValueError(f"case_target must be one of {CASES}")
        if self.planted_gap is not None and not self.planted_gap > 0:
            raise ValueError("planted_gap must be > 0")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "spectrum": list(self.spectrum) if self.spectrum is not None else None,
            "case_target": self.case_target,
            "planted_gap": self.planted_gap,
            "seed": self.seed,
        }


def draw_pair(spec: SampleSpec, trial_index: int = 0,
              profile: ToleranceProfile | None = None) -> tuple[UnitaryMatrix, UnitaryMatrix]:
    """The (U, V) pair for one trial of ``spec``; a pure function of its arguments."""
    rng = trial_rng(spec.seed, trial_index)
    n = spec.n
    if spec.kind == "haar":
        return haar_unitary(n, rng, profile), haar_unitary(n, rng, profile)
    if spec.kind == "fixed_spectrum":
        return (unitary_with_spectrum(spec.spectrum, rng, profile),
                unitary_with_spectrum(spec.spectrum, rng, profile))
    if spec.kind == "case_targeted":
        case = spec.case_target
        if case is None:
            case = CASES[int(rng.integers(3))] if n > 1 else "case_i"
        return case_pair(n, case, rng, profile)
    if spec.kind == "equality_planted":
        return random_equality_pair(n, rng, profile, case_ii=spec.case_target == "case_ii")
    gap = spec.planted_gap if spec.planted_gap is not None else 0.1
    return gap_pair(n, gap, rng, profile)
