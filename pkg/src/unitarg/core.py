"""Shared numerical objects: tolerances, certified unitaries, eigen systems, subspaces.

Angles are radians in the half-open principal interval (-pi, pi].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

TWO_PI = 2.0 * math.pi


class UnitargError(Exception):
    """Base class for all library errors."""


class NotSquare(UnitargError, ValueError):
    pass


class NotUnitary(UnitargError, ValueError):
    def __init__(self, defect: float, tol: float):
        super().__init__(f"unitarity defect {defect:.3e} exceeds tolerance {tol:.3e}")
        self.defect = defect
        self.tol = tol


class NonFinite(UnitargError, ValueError):
    pass


class ConvergenceFailure(UnitargError, ArithmeticError):
    """The eigensolver failed or its output does not reconstruct the input."""


class IndexOutOfRange(UnitargError, IndexError):
    pass


class AmbientMismatch(UnitargError, ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ToleranceProfile:
    """Absolute tolerances used across the library.

    Use :meth:`for_dim` to obtain the dimension-scaled defaults.
    """

    tol_unitary: float = 1e-10
    tol_recon: float = 1e-9
    tol_ortho: float = 1e-10
    tol_cluster: float = 1e-7
    tol_eq: float = 1e-8
    tol_principal_angle: float = 1e-8

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be a positive finite number, got {v!r}")
        if not self.tol_cluster > self.tol_recon:
            raise ValueError("tol_cluster must exceed tol_recon")

    @classmethod
    def for_dim(cls, n: int) -> ToleranceProfile:
        tol_recon = 1e-9 * n
        return cls(
            tol_unitary=1e-10 * n,
            tol_recon=tol_recon,
            tol_cluster=max(1e-7, 10.0 * tol_recon),
        )

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ToleranceProfile:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown tolerance fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_(self, **kw) -> ToleranceProfile:
        return replace(self, **kw)


def resolve_profile(profile: ToleranceProfile | None, n: int) -> ToleranceProfile:
    return ToleranceProfile.for_dim(n) if profile is None else profile


def principal_value(x):
    """Map angle(s) ``x`` into (-pi, pi]; -pi itself maps to +pi.

    Works elementwise on arrays. Raises :class:`NonFinite` on nan/inf input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite angle: {x!r}")
    r = arr - TWO_PI * np.ceil((arr - math.pi) / TWO_PI)
    # rounding can land a hair outside the interval
    r = np.where(r <= -math.pi, r + TWO_PI, r)
    r = np.where(r > math.pi, r - TWO_PI, r)
    if r.ndim == 0:
        return float(r)
    return r


def op_norm(a: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """Square complex matrix certified unitary within ``tol_unitary``."""

    entries: np.ndarray
    unitarity_defect: float

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> UnitaryMatrix:
        return UnitaryMatrix(_readonly(self.entries.conj().T), self.unitarity_defect)

    inverse = adjoint

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return f"UnitaryMatrix(n={self.dim}, defect={self.unitarity_defect:.2e})"


def make_unitary(entries, profile: ToleranceProfile | None = None) -> UnitaryMatrix:
    """Certify ``entries`` as unitary; raise NotSquare / NotUnitary otherwise."""
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotSquare(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has non-finite entries")
    n = a.shape[0]
    profile = resolve_profile(profile, n)
    defect = op_norm(a.conj().T @ a - np.eye(n))
    if defect > profile.tol_unitary:
        raise NotUnitary(defect, profile.tol_unitary)
    return UnitaryMatrix(_readonly(a), defect)


def compose(u: UnitaryMatrix, v: UnitaryMatrix,
            profile: ToleranceProfile | None = None) -> UnitaryMatrix:
    """Certified product ``u @ v``."""
    if u.dim != v.dim:
        raise AmbientMismatch(f"dimensions differ: {u.dim} vs {v.dim}")
    return make_unitary(u.entries @ v.entries, profile)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenangles in (-pi, pi] with orthonormal eigenvectors (columns).

    ``perm_desc``, ``perm_asc`` and ``perm_absdesc`` are 0-based index arrays
    into ``angles``; ties are broken by original index. ``clusters`` partitions
    the indices into groups of numerically degenerate eigenvalues.
    ``branch_edge`` is set when this system was obtained by negating one with
    an angle exactly at pi, where the descending/ascending mirror identity fails.
    """

    angles: np.ndarray
    vectors: np.ndarray
    perm_desc: np.ndarray
    perm_asc: np.ndarray
    perm_absdesc: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    recon_defect: float = 0.0
    branch_edge: bool = False

    @property
    def n(self) -> int:
        return self.angles.shape[0]

    @property
    def desc(self) -> np.ndarray:
        return self.angles[self.perm_desc]

    @property
    def asc(self) -> np.ndarray:
        return self.angles[self.perm_asc]

    @property
    def absdesc(self) -> np.ndarray:
        return np.abs(self.angles[self.perm_absdesc])

    @property
    def top(self) -> float:
        return float(self.angles[self.perm_desc[0]])

    @property
    def bottom(self) -> float:
        return float(self.angles[self.perm_asc[0]])

    @property
    def top_abs(self) -> float:
        return float(abs(self.angles[self.perm_absdesc[0]]))

    @property
    def spread(self) -> float:
        return self.top - self.bottom

    def cluster_of(self, index: int) -> tuple[int, ...]:
        for c in self.clusters:
            if index in c:
                return c
        raise IndexOutOfRange(index)

    def matrix(self) -> np.ndarray:
        w = self.vectors
        return (w * np.exp(1j * self.angles)) @ w.conj().T


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of C^n held as an orthonormal column basis (possibly empty)."""

    basis: np.ndarray
    ambient_dim: int = field(default=-1)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-D array")
        object.__setattr__(self, "basis", _readonly(b))
        if self.ambient_dim < 0:
            object.__setattr__(self, "ambient_dim", b.shape[0])
        elif self.ambient_dim != b.shape[0]:
            raise AmbientMismatch("basis rows do not match ambient_dim")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def span(cls, vectors, tol: float = 1e-10) -> Subspace:
        """Orthonormalize the columns of ``vectors`` (rank-revealing)."""
        a = np.asarray(vectors, dtype=complex)
        if a.ndim == 1:
            a = a[:, None]
        if a.shape[1] == 0:
            return cls(np.zeros((a.shape[0], 0), dtype=complex))
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        rank = int(np.sum(s > tol * max(1.0, s[0])))
        return cls(u[:, :rank])

    @classmethod
    def full(cls, n: int) -> Subspace:
        return cls(np.eye(n, dtype=complex))

    def orthonormality_defect(self) -> float:
        return op_norm(self.basis.conj().T @ self.basis - np.eye(self.dim))


# ---------------------------------------------------------------------------
# JSON matrix format: {"n": int, "re": [[...]], "im": [[...]]}, row-major.

def matrix_to_json_obj(a) -> dict[str, Any]:
    a = np.asarray(a, dtype=complex)
    return {
        "n": int(a.shape[0]),
        "re": [[float(x) for x in row] for row in a.real],
        "im": [[float(x) for x in row] for row in a.imag],
    }


def matrix_from_json_obj(obj: dict[str, Any]) -> np.ndarray:
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (n, n) or im.shape != (n, n):
        raise NotSquare(f"matrix JSON declares n={n} but re/im have shapes {re.shape}, {im.shape}")
    return re + 1j * im


def dumps_matrix(a) -> str:
    return json.dumps(matrix_to_json_obj(a))


def load_matrix(path, profile: ToleranceProfile | None = None) -> UnitaryMatrix:
    with open(path) as fh:
        return make_unitary(matrix_from_json_obj(json.load(fh)), profile)
