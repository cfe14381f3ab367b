"""Four-sphere phase-space maps of direct-sum density matrices.

A state on the F₊ ⊕ F₋ space is rendered as four real fields on the unit
sphere: one multipole field per diagonal manifold block, plus the real and
imaginary parts of a complex field expanded from the inter-manifold
coherence block.  Each sphere also carries a radius: the manifold
population for the two diagonal spheres, and the Frobenius weight of the
coherence block — split between the real and imaginary spheres by the norm
shares of the corresponding field parts — for the other two.

Fields are series of orthonormal spherical harmonics whose coefficients
are trace inner products of the density matrix with the irreducible tensor
operators from :mod:`spinctl.spin_algebra`; no quadrature is involved, so
sphere-integral quantities (the norm shares) are computed exactly from the
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sph_harm_y

from .spin_algebra import SpinSystem, coupled_tensor, m_values, spherical_tensor

__all__ = [
    "GRID_FORMAT",
    "DEFAULT_N_THETA",
    "DEFAULT_N_PHI",
    "SphereRadii",
    "WignerSphereGrid",
    "spherical_harmonic",
    "as_density_matrix",
    "su2_wigner",
    "coherence_coefficients",
    "coherence_wigner",
    "sphere_radii",
    "sphere_grid",
    "export_grid",
    "read_grid_csv",
]

GRID_FORMAT = "spinctl-wigner/1"
DEFAULT_N_THETA = 64
DEFAULT_N_PHI = 128

_HERMITICITY_ATOL = 1e-10
_TRACE_ATOL = 1e-10
_EIGENVALUE_FLOOR = -1e-10
_IMAG_RESIDUE_ATOL = 1e-10


def spherical_harmonic(k: int, q: int, theta, phi) -> np.ndarray:
    """Orthonormal spherical harmonic Y(k, q) with Condon–Shortley phase.

    ``theta`` is the polar angle in [0, π], ``phi`` the azimuth; both may be
    arrays and broadcast against each other.
    """
    if not isinstance(k, (int, np.integer)) or not isinstance(q, (int, np.integer)):
        raise ValueError("harmonic indices k, q must be integers")
    if k < 0:
        raise ValueError(f"degree k = {k} must be non-negative")
    if abs(q) > k:
        raise ValueError(f"|q| = {abs(q)} exceeds degree k = {k}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.size and (theta.min() < -1e-12 or theta.max() > math.pi + 1e-12):
        raise ValueError("polar angle theta must lie in [0, pi]")
    return sph_harm_y(k, q, theta, phi)


def as_density_matrix(state_or_rho, dim: int | None = None) -> np.ndarray:
    """Coerce a state vector or density matrix into a validated density matrix.

    Vectors must be normalized; matrices must be Hermitian, unit trace, and
    positive semidefinite (all to 1e-10).
    """
    arr = np.asarray(state_or_rho, dtype=complex)
    if arr.ndim == 1:
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state vector norm {norm} is not 1")
        arr = np.outer(arr, arr.conj())
    elif arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a vector or square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"density matrix dimension {arr.shape[0]} != expected {dim}")
    if np.abs(arr - arr.conj().T).max() > _HERMITICITY_ATOL:
        raise ValueError("density matrix is not Hermitian")
    trace = np.trace(arr)
    if abs(trace - 1.0) > _TRACE_ATOL:
        raise ValueError(f"density matrix trace {trace} is not 1")
    if np.linalg.eigvalsh(arr).min() < _EIGENVALUE_FLOOR:
        raise ValueError("density matrix has a negative eigenvalue")
    return arr


def su2_wigner(rho_block, j: float, theta, phi) -> np.ndarray:
    """Multipole field of one manifold block: Σ ⟨T(k,q), ρ⟩ Y(k,q).

    The coefficients are the trace inner products ⟨T(k,q), ρ⟩ = Tr[T(k,q)† ρ]
    (the orthonormal-basis expansion components of the block), which makes
    the field rotationally covariant: rotating the block moves features of
    the field through the same rotation of the sphere.  ``rho_block`` is the
    raw (not renormalized) diagonal block for spin ``j``; the result is real
    for Hermitian blocks (conjugate (k, ±q) terms pair up), and a residual
    imaginary part ≥ 1e-10 raises.
    """
    rho_block = np.asarray(rho_block, dtype=complex)
    dim = m_values(j).size
    if rho_block.shape != (dim, dim):
        raise ValueError(
            f"block shape {rho_block.shape} does not match spin {j} (dim {dim})"
        )
    field = np.zeros(np.broadcast(np.asarray(theta), np.asarray(phi)).shape, complex)
    for k in range(dim):
        for q in range(-k, k + 1):
            a = np.vdot(spherical_tensor(j, k, q), rho_block)
            if abs(a) < 1e-15:
                continue
            field = field + a * spherical_harmonic(k, q, theta, phi)
    residue = np.abs(field.imag).max() if field.size else 0.0
    if residue >= _IMAG_RESIDUE_ATOL:
        raise ValueError(
            f"field imaginary residue {residue:.3e}; is the block Hermitian?"
        )
    return field.real


def coherence_coefficients(rho, system: SpinSystem) -> dict[tuple[int, int], complex]:
    """Expansion coefficients of the inter-manifold coherence block.

    Coefficient (k, q) is the trace inner product ⟨T(k, q; F₋, F₊), ρ⟩, i.e.
    the component of the lower-left coherence block of ρ along the
    orthonormal coupled tensor T(k, q; F₋, F₊).  The sign/conjugation
    convention is fixed so that the superposition (|4,4⟩+|3,−3⟩)/√2 in the
    cesium system has a single real positive coefficient.
    """
    rho = np.asarray(rho, dtype=complex)
    fp, fm = system.f_plus, system.f_minus
    coeffs: dict[tuple[int, int], complex] = {}
    for k in range(round(fp - fm), round(fp + fm) + 1):
        for q in range(-k, k + 1):
            T = coupled_tensor(system, fm, fp, k, q)
            coeffs[(k, q)] = complex(np.vdot(T, rho))
    return coeffs


def coherence_wigner(rho, system: SpinSystem, theta, phi) -> np.ndarray:
    """Complex coherence field: Σ ⟨T(k,q; F₋,F₊), ρ⟩ Y(k,q).

    Block-diagonal density matrices give the zero field.  The conjugate
    pairing (upper-right block against T(k, q; F₊, F₋)) carries the same
    information up to sign and conjugation and is not computed separately.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (system.dim, system.dim):
        raise ValueError(f"expected a {system.dim}x{system.dim} matrix, got {rho.shape}")
    field = np.zeros(np.broadcast(np.asarray(theta), np.asarray(phi)).shape, complex)
    for (k, q), a in coherence_coefficients(rho, system).items():
        if abs(a) < 1e-15:
            continue
        field = field + a * spherical_harmonic(k, q, theta, phi)
    return field


@dataclass(frozen=True)
class SphereRadii:
    """Radii of the four spheres representing one density matrix.

    ``r_plus`` / ``r_minus`` are the manifold populations; ``coherence`` is
    the Frobenius norm of the inter-manifold block, and ``r_real`` /
    ``r_imag`` split it by the norm shares of the real and imaginary parts
    of the coherence field (they sum to ``coherence``).
    """

    r_plus: float
    r_minus: float
    r_real: float
    r_imag: float
    coherence: float


def sphere_radii(rho, system: SpinSystem) -> SphereRadii:
    """Population and coherence radii of the four-sphere representation.

    The real/imaginary split uses the exact sphere integrals of the field:
    with coefficients a(k, q), ∫|W|² = Σ|a|² and ∫W² = Σ (−1)^q a(k,q)
    a(k,−q), so ∫(Re W)² = (Σ|a|² + Re∫W²)/2 and likewise for Im with a
    minus sign — no quadrature involved.
    """
    rho = as_density_matrix(rho, system.dim)
    bp = system.block(system.f_plus)
    bm = system.block(system.f_minus)
    r_plus = float(np.trace(rho[bp, bp]).real)
    r_minus = float(np.trace(rho[bm, bm]).real)
    coherence = float(np.linalg.norm(rho[bp, bm]))
    coeffs = coherence_coefficients(rho, system)
    total = sum(abs(a) ** 2 for a in coeffs.values())
    if total <= 1e-30:
        share_real = 0.0
    else:
        z = sum(
            (-1) ** q * a * coeffs[(k, -q)] for (k, q), a in coeffs.items()
        )
        share_real = min(max(0.5 * (1.0 + z.real / total), 0.0), 1.0)
    return SphereRadii(
        r_plus=r_plus,
        r_minus=r_minus,
        r_real=coherence * share_real,
        r_imag=coherence * (1.0 - share_real),
        coherence=coherence,
    )


@dataclass(frozen=True)
class WignerSphereGrid:
    """Four sampled sphere fields plus radii on a uniform θ×φ grid.

    ``theta`` spans [0, π] inclusive; ``phi`` spans [0, 2π) without the
    duplicate endpoint.  Field arrays are (n_theta, n_phi).
    """

    f_plus: float
    f_minus: float
    theta: np.ndarray
    phi: np.ndarray
    field_plus: np.ndarray
    field_minus: np.ndarray
    coherence_real: np.ndarray
    coherence_imag: np.ndarray
    radii: SphereRadii

    def __post_init__(self):
        shape = (self.theta.size, self.phi.size)
        for name in ("field_plus", "field_minus", "coherence_real", "coherence_imag"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} shape {getattr(self, name).shape} != {shape}")

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size


def sphere_grid(
    state_or_rho,
    system: SpinSystem,
    n_theta: int = DEFAULT_N_THETA,
    n_phi: int = DEFAULT_N_PHI,
) -> WignerSphereGrid:
    """Sample all four sphere fields of a state on a uniform grid."""
    if n_theta < 2 or n_phi < 1:
        raise ValueError(f"grid {n_theta}x{n_phi} too small")
    rho = as_density_matrix(state_or_rho, system.dim)
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    tt = theta[:, None]
    pp = phi[None, :]
    bp = system.block(system.f_plus)
    bm = system.block(system.f_minus)
    coherence = coherence_wigner(rho, system, tt, pp)
    return WignerSphereGrid(
        f_plus=system.f_plus,
        f_minus=system.f_minus,
        theta=theta,
        phi=phi,
        field_plus=su2_wigner(rho[bp, bp], system.f_plus, tt, pp),
        field_minus=su2_wigner(rho[bm, bm], system.f_minus, tt, pp),
        coherence_real=np.ascontiguousarray(coherence.real),
        coherence_imag=np.ascontiguousarray(coherence.imag),
        radii=sphere_radii(rho, system),
    )


def export_grid(
    state_or_rho,
    system: SpinSystem,
    path,
    n_theta: int = DEFAULT_N_THETA,
    n_phi: int = DEFAULT_N_PHI,
) -> WignerSphereGrid:
    """Sample the four-sphere fields and write them to a delimited text file.

    The header line carries the format version, both spin values, the grid
    resolution, and all five radii; each body row holds θ, φ, and the four
    field values at that grid point.  Returns the grid that was written.
    """
    grid = sphere_grid(state_or_rho, system, n_theta, n_phi)
    r = grid.radii
    header_fields = [
        GRID_FORMAT,
        f"f_plus={grid.f_plus:.17g}",
        f"f_minus={grid.f_minus:.17g}",
        f"n_theta={grid.n_theta}",
        f"n_phi={grid.n_phi}",
        f"r_plus={r.r_plus:.17g}",
        f"r_minus={r.r_minus:.17g}",
        f"r_real={r.r_real:.17g}",
        f"r_imag={r.r_imag:.17g}",
        f"coherence={r.coherence:.17g}",
    ]
    lines = ["# " + " ".join(header_fields)]
    lines.append("theta,phi,manifold_plus,manifold_minus,coherence_real,coherence_imag")
    for i, t in enumerate(grid.theta):
        for j, p in enumerate(grid.phi):
            lines.append(
                ",".join(
                    f"{v:.17g}"
                    for v in (
                        t,
                        p,
                        grid.field_plus[i, j],
                        grid.field_minus[i, j],
                        grid.coherence_real[i, j],
                        grid.coherence_imag[i, j],
                    )
                )
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return grid


def read_grid_csv(path) -> WignerSphereGrid:
    """Parse a file written by :func:`export_grid`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or not lines[0].startswith("# "):
        raise ValueError(f"{path}: missing header line")
    tokens = lines[0][2:].split()
    if not tokens or tokens[0] != GRID_FORMAT:
        raise ValueError(
            f"{path}: unsupported format {tokens[0] if tokens else '<empty>'!r}"
        )
    meta: dict[str, float] = {}
    for token in tokens[1:]:
        key, _, value = token.partition("=")
        meta[key] = float(value)
    try:
        n_theta = round(meta["n_theta"])
        n_phi = round(meta["n_phi"])
        radii = SphereRadii(
            r_plus=meta["r_plus"],
            r_minus=meta["r_minus"],
            r_real=meta["r_real"],
            r_imag=meta["r_imag"],
            coherence=meta["coherence"],
        )
        f_plus = meta["f_plus"]
        f_minus = meta["f_minus"]
    except KeyError as exc:
        raise ValueError(f"{path}: header missing field {exc}") from exc
    body = lines[2:]
    if len(body) != n_theta * n_phi:
        raise ValueError(
            f"{path}: expected {n_theta * n_phi} data rows, found {len(body)}"
        )
    data = np.array([[float(v) for v in line.split(",")] for line in body])
    if data.shape[1] != 6:
        raise ValueError(f"{path}: expected 6 columns, found {data.shape[1]}")
    cols = data.reshape(n_theta, n_phi, 6)
    return WignerSphereGrid(
        f_plus=f_plus,
        f_minus=f_minus,
        theta=cols[:, 0, 0].copy(),
        phi=cols[0, :, 1].copy(),
        field_plus=np.ascontiguousarray(cols[:, :, 2]),
        field_minus=np.ascontiguousarray(cols[:, :, 3]),
        coherence_real=np.ascontiguousarray(cols[:, :, 4]),
        coherence_imag=np.ascontiguousarray(cols[:, :, 5]),
        radii=radii,
    )
