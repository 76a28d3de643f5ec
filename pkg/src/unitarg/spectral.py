"""Functions of a unitary built from a fixed eigen system."""

from __future__ import annotations

import math

import numpy as np

from .core import (
    EigenSystem,
    ToleranceProfile,
    UnitargError,
    UnitaryMatrix,
    make_unitary,
    resolve_profile,
)


class ExponentOutOfRange(UnitargError, ValueError):
    pass


class NotCaseTwo(UnitargError, ValueError):
    pass


class EmptyInterval(UnitargError, ArithmeticError):
    pass


def fractional_power(sys: EigenSystem, a: float,
                     profile: ToleranceProfile | None = None) -> UnitaryMatrix:
    """U**a = sum_j exp(i*a*angle_j) |v_j><v_j| for a in [0, 1].

    Always reuse one ``sys`` for U**a and U**(1-a) so that the two factors
    share eigenvectors and multiply back to U.
    """
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise ExponentOutOfRange(f"exponent {a} outside [0, 1]")
    w = np.asarray(sys.vectors)
    mat = (w * np.exp(1j * a * np.asarray(sys.angles))) @ w.conj().T
    return make_unitary(mat, resolve_profile(profile, sys.n))


def a_interval(sys_u: EigenSystem, sys_v: EigenSystem) -> tuple[float, float]:
    """Open interval of admissible exponents for splitting the wide factor U."""
    su = sys_u.spread
    sv = sys_v.spread
    return (su - math.pi) / su, (math.pi - sv) / su


def pick_a(sys_u: EigenSystem, sys_v: EigenSystem) -> float:
    """Midpoint of the admissible exponent interval for a case-(ii) pair.

    Requires spread(U) in [pi, 2pi), spread(V) < pi, top(U)+top(V) <= pi and
    bottom(U)+bottom(V) > -pi. For case (iii) call with the roles swapped.
    """
    su, sv = sys_u.spread, sys_v.spread
    if not (math.pi <= su < 2 * math.pi and sv < math.pi
            and sys_u.top + sys_v.top <= math.pi
            and sys_u.bottom + sys_v.bottom > -math.pi):
        raise NotCaseTwo(
            f"need spread(U) in [pi, 2pi), spread(V) < pi and the sum conditions; "
            f"got spreads {su:.6g}, {sv:.6g}"
        )
    lo, hi = a_interval(sys_u, sys_v)
    if not lo < hi:
        raise EmptyInterval(f"admissible exponent interval ({lo}, {hi}) is empty")
    a = 0.5 * (lo + hi)
    return a
