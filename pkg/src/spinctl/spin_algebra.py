"""Operators and tensor bases for alkali ground-state hyperfine manifolds.

The electronic ground state of an alkali atom with nuclear spin I splits into
two hyperfine manifolds with total spin F± = I ± 1/2.  Everything in this
package acts on the direct-sum space F+ ⊕ F- of dimension 2(2I + 1), with the
basis ordered as

    |F+, F+⟩, |F+, F+ - 1⟩, ..., |F+, -F+⟩, |F-, F-⟩, ..., |F-, -F-⟩

(magnetic quantum number descending within each manifold, upper manifold
first), so index 0 is the stretched state |F+, F+⟩.  Operators are plain
complex ndarrays in this fixed basis.

Conventions: Condon-Shortley phases throughout.  `clebsch_gordan` returns the
standard tabulated coefficient ⟨j1 m1; j2 m2 | J M⟩.  Rank-k spherical tensor
components are built as

    T(k, q) = sqrt((2k+1)/(2J+1)) * sum_m ⟨J m; k q | J m+q⟩ |J m+q⟩⟨J m|

which makes T(0, 0) the normalized identity and T(1, 0) a positive multiple
of Jz; the coupled (off-manifold) tensors generalize this with row spin F and
column spin F'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "clebsch_gordan",
    "angular_momentum",
    "spherical_tensor",
    "SpinSystem",
    "MicrowaveTransition",
    "ProjectedOperators",
    "projected_operators",
    "pseudospin",
    "coupled_tensor",
    "coupled_tensor_labels",
    "coupled_tensor_basis",
]


def _twice(j: float, name: str = "j") -> int:
    """Validate that ``j`` is a non-negative half-integer and return 2j as int."""
    tj = round(2 * j)
    if abs(2 * j - tj) > 1e-9:
        raise ValueError(f"{name} = {j} is not a half-integer")
    if tj < 0:
        raise ValueError(f"{name} = {j} must be non-negative")
    return int(tj)


def _twice_m(j: float, m: float, jname: str, mname: str) -> tuple[int, int]:
    """Validate magnetic number m against spin j; return (2j, 2m) as ints."""
    tj = _twice(j, jname)
    tm = round(2 * m)
    if abs(2 * m - tm) > 1e-9 or (tj - tm) % 2 != 0:
        raise ValueError(f"{mname} = {m} is not compatible with {jname} = {j}")
    if abs(tm) > tj:
        raise ValueError(f"|{mname}| = {abs(m)} exceeds {jname} = {j}")
    return tj, int(tm)


def m_values(j: float) -> np.ndarray:
    """Magnetic quantum numbers of spin j in basis order (descending j ... -j)."""
    tj = _twice(j)
    return (tj - 2 * np.arange(tj + 1)) / 2.0


@lru_cache(maxsize=None)
def _cg_racah(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    """Racah closed-form sum, exact rationals up to the final square root.

    All arguments are doubled (integer) spins/projections; selection rules and
    domain checks are done by the caller.
    """
    f = math.factorial
    # Triangle coefficient and m-dependent factorials, exact.
    pref = Fraction(tJ + 1) * Fraction(
        f((tj1 + tj2 - tJ) // 2)
        * f((tj1 - tj2 + tJ) // 2)
        * f((-tj1 + tj2 + tJ) // 2),
        f((tj1 + tj2 + tJ) // 2 + 1),
    )
    pref *= Fraction(
        f((tJ + tM) // 2)
        * f((tJ - tM) // 2)
        * f((tj1 - tm1) // 2)
        * f((tj1 + tm1) // 2)
        * f((tj2 - tm2) // 2)
        * f((tj2 + tm2) // 2)
    )
    k_min = max(0, (tj2 - tJ - tm1) // 2, (tj1 - tJ + tm2) // 2)
    k_max = min(
        (tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2
    )
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            f(k)
            * f((tj1 + tj2 - tJ) // 2 - k)
            * f((tj1 - tm1) // 2 - k)
            * f((tj2 + tm2) // 2 - k)
            * f((tJ - tj2 + tm1) // 2 + k)
            * f((tJ - tj1 - tm2) // 2 + k)
        )
        total += Fraction(-1 if k % 2 else 1, denom)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pref * total * total))


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, J: float, M: float) -> float:
    """Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩, Condon-Shortley phases.

    Evaluated by the Racah closed-form sum with exact rational/factorial
    arithmetic; the only floating-point step is the final square root.
    Violated selection rules (M != m1 + m2, or |M| > J) give 0.0; inconsistent
    spins (non-half-integer, |m| > j, non-triangular (j1, j2, J)) raise
    ``ValueError``.
    """
    tj1, tm1 = _twice_m(j1, m1, "j1", "m1")
    tj2, tm2 = _twice_m(j2, m2, "j2", "m2")
    tJ = _twice(J, "J")
    tM = round(2 * M)
    if abs(2 * M - tM) > 1e-9 or (tJ - tM) % 2 != 0:
        raise ValueError(f"M = {M} is not compatible with J = {J}")
    if (tj1 + tj2 - tJ) % 2 != 0 or not abs(tj1 - tj2) <= tJ <= tj1 + tj2:
        raise ValueError(f"(j1, j2, J) = ({j1}, {j2}, {J}) violates the triangle rule")
    if tM != tm1 + tm2 or abs(tM) > tJ:
        return 0.0
    return _cg_racah(tj1, tm1, tj2, tm2, tJ, int(tM))


def angular_momentum(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-j operators (Jx, Jy, Jz) in the basis |j, j⟩ ... |j, -j⟩."""
    m = m_values(j)
    dim = m.size
    jz = np.diag(m).astype(complex)
    # J+ takes |j, m⟩ (column index of m) to |j, m+1⟩ (one row up).
    raise_amp = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.zeros((dim, dim), dtype=complex)
    jp[np.arange(dim - 1), np.arange(1, dim)] = raise_amp
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


def spherical_tensor(j: float, k: int, q: int) -> np.ndarray:
    """Irreducible rank-k spherical tensor component T(k, q) for spin j.

    Orthonormal under the trace inner product: Tr[T(k,q)† T(k',q')] = δ δ.
    Requires 0 <= k <= 2j and |q| <= k.
    """
    tj = _twice(j)
    if not isinstance(k, (int, np.integer)) or not isinstance(q, (int, np.integer)):
        raise ValueError("tensor indices k, q must be integers")
    if not 0 <= k <= tj:
        raise ValueError(f"rank k = {k} outside 0..2j = {tj}")
    if abs(q) > k:
        raise ValueError(f"|q| = {abs(q)} exceeds rank k = {k}")
    m = m_values(j)
    dim = m.size
    T = np.zeros((dim, dim), dtype=complex)
    for col, mm in enumerate(m):
        mp = mm + q
        if abs(mp) > j:
            continue
        row = int(round(j - mp))
        T[row, col] = clebsch_gordan(j, mm, k, q, j, mp)
    T *= math.sqrt((2 * k + 1) / (tj + 1))
    return T


@dataclass(frozen=True)
class MicrowaveTransition:
    """One microwave-coupled pair |F-, m-⟩ ↔ |F+, m+⟩ with |m+ - m-| <= 1."""

    m_minus: float
    m_plus: float

    def validate_for(self, system: "SpinSystem") -> None:
        """Raise ``ValueError`` unless this transition exists for ``system``."""
        _twice_m(system.f_minus, self.m_minus, "f_minus", "m_minus")
        _twice_m(system.f_plus, self.m_plus, "f_plus", "m_plus")
        if abs(round(2 * (self.m_plus - self.m_minus))) > 2:
            raise ValueError(
                f"transition {self.label()} changes m by more than one unit"
            )

    def label(self) -> str:
        def fmt(m: float) -> str:
            return f"{m:+g}"

        return f"({fmt(self.m_minus)}->{fmt(self.m_plus)})"


@dataclass(frozen=True)
class SpinSystem:
    """Hyperfine structure F+ ⊕ F- for one alkali atom with nuclear spin I."""

    nuclear_spin: float

    def __post_init__(self) -> None:
        ti = _twice(self.nuclear_spin, "nuclear_spin")
        if ti < 1:
            raise ValueError("nuclear spin must be at least 1/2")
        object.__setattr__(self, "nuclear_spin", ti / 2.0)

    @classmethod
    def cesium(cls) -> "SpinSystem":
        """Cs-133 ground state: I = 7/2, F = 4 and F = 3, dimension 16."""
        return cls(nuclear_spin=3.5)

    @property
    def f_plus(self) -> float:
        return self.nuclear_spin + 0.5

    @property
    def f_minus(self) -> float:
        return self.nuclear_spin - 0.5

    @property
    def dim_plus(self) -> int:
        return round(2 * self.f_plus) + 1

    @property
    def dim_minus(self) -> int:
        return round(2 * self.f_minus) + 1

    @property
    def dim(self) -> int:
        return self.dim_plus + self.dim_minus

    def block(self, f: float) -> slice:
        """Index slice of manifold F = f within the direct-sum basis."""
        if f == self.f_plus:
            return slice(0, self.dim_plus)
        if f == self.f_minus:
            return slice(self.dim_plus, self.dim)
        raise ValueError(f"F = {f} is not a manifold of I = {self.nuclear_spin}")

    def basis_index(self, f: float, m: float) -> int:
        """Position of |F = f, m⟩ in the direct-sum basis."""
        _twice_m(f, m, "f", "m")
        offset = self.block(f).start
        return offset + round(f - m)

    def basis_labels(self) -> list[tuple[float, float]]:
        """(F, m) pairs in basis order."""
        labels = [(self.f_plus, m) for m in m_values(self.f_plus)]
        labels += [(self.f_minus, m) for m in m_values(self.f_minus)]
        return labels

    def stretched_state(self) -> np.ndarray:
        """Fiducial state |F+, F+⟩ (basis index 0) as a unit column vector."""
        psi = np.zeros(self.dim, dtype=complex)
        psi[0] = 1.0
        return psi

    def transitions(self) -> list[MicrowaveTransition]:
        """All valid microwave transitions, ordered by (m- desc, m+ desc)."""
        out = []
        for mm in m_values(self.f_minus):
            for mp in (mm + 1, mm, mm - 1):
                if abs(mp) <= self.f_plus:
                    out.append(MicrowaveTransition(m_minus=mm, m_plus=mp))
        return out

    def clock_transition(self) -> MicrowaveTransition:
        """The magnetic-field-insensitive |F-, 0⟩ ↔ |F+, 0⟩ transition."""
        return MicrowaveTransition(m_minus=0.0, m_plus=0.0)


@dataclass(frozen=True)
class ProjectedOperators:
    """Block spin operators zero-padded into F+ ⊕ F-, plus the projectors."""

    fx_plus: np.ndarray
    fy_plus: np.ndarray
    fz_plus: np.ndarray
    fx_minus: np.ndarray
    fy_minus: np.ndarray
    fz_minus: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray


def _embed(system: SpinSystem, f: float, op: np.ndarray) -> np.ndarray:
    full = np.zeros((system.dim, system.dim), dtype=complex)
    blk = system.block(f)
    full[blk, blk] = op
    return full


def projected_operators(system: SpinSystem) -> ProjectedOperators:
    """Embedded manifold operators F{x,y,z}± and projectors P± for ``system``."""
    ops = {}
    for name, f in (("plus", system.f_plus), ("minus", system.f_minus)):
        jx, jy, jz = angular_momentum(f)
        ops[f"fx_{name}"] = _embed(system, f, jx)
        ops[f"fy_{name}"] = _embed(system, f, jy)
        ops[f"fz_{name}"] = _embed(system, f, jz)
        ops[f"p_{name}"] = _embed(system, f, np.eye(jx.shape[0], dtype=complex))
    return ProjectedOperators(**ops)


def pseudospin(
    system: SpinSystem, transition: MicrowaveTransition
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pauli operators (σx, σy, σz) of one microwave transition.

    σx = |F+, m+⟩⟨F-, m-| + h.c., σy = -i|F+, m+⟩⟨F-, m-| + h.c., and
    σz = |F+, m+⟩⟨F+, m+| - |F-, m-⟩⟨F-, m-|, embedded in the full space.
    """
    transition.validate_for(system)
    up = system.basis_index(system.f_plus, transition.m_plus)
    dn = system.basis_index(system.f_minus, transition.m_minus)
    dim = system.dim
    sx = np.zeros((dim, dim), dtype=complex)
    sy = np.zeros((dim, dim), dtype=complex)
    sz = np.zeros((dim, dim), dtype=complex)
    sx[up, dn] = 1.0
    sx[dn, up] = 1.0
    sy[up, dn] = -1j
    sy[dn, up] = 1j
    sz[up, up] = 1.0
    sz[dn, dn] = -1.0
    return sx, sy, sz


def coupled_tensor(system: SpinSystem, f_row: float, f_col: float, k: int, q: int) -> np.ndarray:
    """Coupled tensor T(k, q; F, F') supported on the (F_row, F_col) block.

    T = sqrt((2k+1)/(2 F_row + 1)) * sum_m ⟨F_col m; k q | F_row m+q⟩
        |F_row, m+q⟩⟨F_col, m|, embedded in the full space.  Requires
    |F_row - F_col| <= k <= F_row + F_col and |q| <= k.
    """
    trow = _twice(f_row, "f_row")
    tcol = _twice(f_col, "f_col")
    for f in (f_row, f_col):
        system.block(f)  # validates membership
    if not isinstance(k, (int, np.integer)) or not isinstance(q, (int, np.integer)):
        raise ValueError("tensor indices k, q must be integers")
    if not abs(trow - tcol) <= 2 * k <= trow + tcol:
        raise ValueError(
            f"rank k = {k} outside |F-F'|..F+F' = {abs(trow - tcol) / 2}..{(trow + tcol) / 2}"
        )
    if abs(q) > k:
        raise ValueError(f"|q| = {abs(q)} exceeds rank k = {k}")
    T = np.zeros((system.dim, system.dim), dtype=complex)
    row0 = system.block(f_row).start
    col0 = system.block(f_col).start
    for mm in m_values(f_col):
        mp = mm + q
        if abs(mp) > f_row:
            continue
        row = row0 + round(f_row - mp)
        col = col0 + round(f_col - mm)
        T[row, col] = clebsch_gordan(f_col, mm, k, q, f_row, mp)
    T *= math.sqrt((2 * k + 1) / (trow + 1))
    return T


def coupled_tensor_labels(system: SpinSystem) -> list[tuple[float, float, int, int]]:
    """(F_row, F_col, k, q) for the complete operator basis, in canonical order.

    Blocks are ordered (+,+), (-,-), (+,-), (-,+); within a block k ascends
    from |F_row - F_col| to F_row + F_col and q ascends from -k to k.  The
    total count is dim² of the direct-sum space.
    """
    fp, fm = system.f_plus, system.f_minus
    labels = []
    for f_row, f_col in ((fp, fp), (fm, fm), (fp, fm), (fm, fp)):
        k_min = round(abs(f_row - f_col))
        k_max = round(f_row + f_col)
        for k in range(k_min, k_max + 1):
            for q in range(-k, k + 1):
                labels.append((f_row, f_col, k, q))
    return labels


def coupled_tensor_basis(system: SpinSystem) -> dict[tuple[float, float, int, int], np.ndarray]:
    """Complete orthonormal operator basis {T(k, q; F, F')} keyed by label."""
    return {
        lab: coupled_tensor(system, *lab) for lab in coupled_tensor_labels(system)
    }
