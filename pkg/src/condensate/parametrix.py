"""Model matrices: the gap-independent outer solution, the local corrections
on the shrinking cuts, their piecewise composite, and the error-matrix jumps.

Everything here is an explicit product of a Cayley matrix sandwiched between
diagonal phase exponentials, so determinants are exactly one and boundary
values on the cuts come from the one-sided radicals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .normalization import NormalizationData, scale_constant
from .spectral import (SIGMA2, SIGMA_MINUS, SIGMA_PLUS, SpectralConfig,
                       SpectralError, background_radical,
                       background_radical_boundary, cayley_matrix, flow_phase,
                       quartic_root, quartic_root_boundary)

__all__ = [
    "RegionConfig",
    "default_regions",
    "outer_phase",
    "outer_phase_reduced",
    "outer_phase_limit",
    "outer_jump_matrix",
    "outer_model",
    "outer_model_tail",
    "local_cayley",
    "local_model",
    "composite_model",
    "error_jump",
    "error_jump_limit",
    "conjugate_by_phase",
    "inv_unimodular",
]


def conjugate_by_phase(mat: np.ndarray, gamma: complex) -> np.ndarray:
    """exp(-i gamma sigma3) @ mat @ exp(i gamma sigma3)."""
    out = np.array(mat, dtype=complex)
    shift = np.exp(-2j * gamma)
    out[0, 1] = out[0, 1] * shift
    out[1, 0] = out[1, 0] / shift
    return out


def inv_unimodular(mat: np.ndarray) -> np.ndarray:
    """Inverse of a det-1 matrix without division."""
    return np.array([[mat[1, 1], -mat[0, 1]], [-mat[1, 0], mat[0, 0]]],
                    dtype=complex)


@dataclass(frozen=True)
class RegionConfig:
    """Disks isolating the shrinking cuts from the rest of the plane."""

    center_upper: complex
    center_lower: complex
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise SpectralError("disk radius must be positive")
        if abs(self.center_lower - self.center_upper.conjugate()) > 1e-12:
            raise SpectralError("disks must be conjugate images of each other")

    def region(self, z: complex) -> int:
        """+1 / -1 inside the upper / lower disk, 0 outside both."""
        if abs(z - self.center_upper) < self.radius:
            return 1
        if abs(z - self.center_lower) < self.radius:
            return -1
        return 0

    def on_boundary(self, z: complex, atol: float = 1e-9) -> int:
        if abs(abs(z - self.center_upper) - self.radius) <= atol * self.radius:
            return 1
        if abs(abs(z - self.center_lower) - self.radius) <= atol * self.radius:
            return -1
        return 0


def default_regions(cfg: SpectralConfig) -> RegionConfig:
    """Disks centered on the shrinking cuts, kept clear of every other cut.

    Radius is a quarter of the least distance from E3 to the fixed branch
    data (E1, the main cut, the real axis), and always covers the cut.
    """
    center = cfg.e3 + 0.5 * cfg.epsilon
    main = cfg.arc("main")
    radius = 0.25 * min(abs(cfg.e3 - cfg.e1), main.distance(cfg.e3), cfg.e3.imag)
    if radius <= 0.75 * cfg.epsilon:
        raise SpectralError("disk radius does not cover the shrinking cut; "
                            "epsilon too large for this geometry")
    return RegionConfig(center_upper=center, center_lower=center.conjugate(),
                        radius=radius)


def outer_phase_reduced(z, x: float, t: float, cfg: SpectralConfig,
                        side: int = 0):
    """Outer phase minus its value at infinity, in cancellation-free form.

    Writing m = Re E1, a = Im E1 and using R0^2 = (z-m)^2 + a^2, the defining
    combination collapses to a^2 (t - (2t(z+m)+x) / ((z-m) + R0)), which
    decays like 1/z without the naive z^2-size cancellations.
    """
    m, a = cfg.e1.real, cfg.e1.imag
    rad = (background_radical_boundary(z, cfg, side) if side
           else background_radical(z, cfg))
    return a * a * (t - (2.0 * t * (z + m) + x) / ((z - m) + rad))


def outer_phase(z, x: float, t: float, cfg: SpectralConfig, side: int = 0):
    """Phase correction that trades the quadratic flow phase for one growing
    along the background radical; analytic off the main cut."""
    return outer_phase_limit(x, t, cfg) + outer_phase_reduced(z, x, t, cfg, side)


def outer_phase_limit(x: float, t: float, cfg: SpectralConfig) -> float:
    """Value of the outer phase at infinity (real)."""
    re, im = cfg.e1.real, cfg.e1.imag
    return (2.0 * re * re - im * im) * t + re * x


def outer_jump_matrix(z, x: float, t: float) -> np.ndarray:
    """Jump of the outer model across the main cut."""
    return conjugate_by_phase(-1j * SIGMA2, flow_phase(z, x, t))


def outer_model(z, x: float, t: float, cfg: SpectralConfig,
                side: int = 0) -> np.ndarray:
    """The gap-independent model matrix; unimodular, identity at infinity.

    side=±1 requests the boundary value on the main cut.
    """
    if side == 0 and cfg.arc("main").contains(z):
        raise SpectralError("outer_model on the main cut requires side=±1")
    mu = (quartic_root_boundary(z, cfg, 0, side) if side
          else quartic_root(z, cfg, 0))
    delta = outer_phase_reduced(z, x, t, cfg, side)
    gamma0 = outer_phase_limit(x, t, cfg)
    mat = cayley_matrix(mu)
    # sandwich exp(-i gamma0 s3) N exp(i (gamma0 + delta) s3), entrywise so the
    # diagonal sees only the decaying reduced phase
    up, dn = np.exp(1j * delta), np.exp(-1j * delta)
    carrier = np.exp(2j * gamma0)
    return np.array([[mat[0, 0] * up, mat[0, 1] * dn / carrier],
                     [mat[1, 0] * up * carrier, mat[1, 1] * dn]])


def outer_model_tail(x: float, t: float, cfg: SpectralConfig) -> complex:
    """lim z * [outer model]_{12}: the upper-right 1/z coefficient.

    From the quartic root expansion the Cayley (1,2) entry decays like
    Im(E1)/(2z); both phase factors tend to the outer phase limit.
    """
    return 0.5 * cfg.e1.imag * np.exp(-2j * outer_phase_limit(x, t, cfg))


def local_cayley(z, cfg: SpectralConfig, which: int) -> np.ndarray:
    """Cayley factor of the local model; identity + O(epsilon) off the cut."""
    return cayley_matrix(quartic_root(z, cfg, which))


def local_model(z, x: float, t: float, cfg: SpectralConfig,
                data: NormalizationData, sign: int) -> np.ndarray:
    """Local correction on the shrinking cut for sign=+1 (upper) or -1 (lower)."""
    if sign == 1:
        gamma = (flow_phase(z, x, t)
                 + 0.5 * (cfg.alpha - data.jump_constant))
    elif sign == -1:
        gamma = (flow_phase(z, x, t)
                 + 0.5 * (cfg.alpha - np.conj(data.jump_constant)))
    else:
        raise SpectralError("sign must be ±1")
    return conjugate_by_phase(local_cayley(z, cfg, sign), gamma)


def composite_model(z, x: float, t: float, cfg: SpectralConfig,
                    data: NormalizationData,
                    regions: RegionConfig) -> np.ndarray:
    """Piecewise model: outer alone outside the disks, outer times local inside."""
    if regions.on_boundary(z):
        raise SpectralError("composite model is two-sided on a disk boundary; "
                            "evaluate the jump instead")
    which = regions.region(z)
    psi0 = outer_model(z, x, t, cfg)
    if which == 0:
        return psi0
    return psi0 @ local_model(z, x, t, cfg, data, which)


def error_jump(z, x: float, t: float, cfg: SpectralConfig,
               data: NormalizationData, side_hint: int | None = None) -> np.ndarray:
    """Jump of the error matrix on a disk boundary at the configured gap:
    psi0 psi_local^{-1} psi0^{-1}."""
    sign = side_hint or (1 if z.imag >= 0 else -1)
    psi0 = outer_model(z, x, t, cfg)
    local = local_model(z, x, t, cfg, data, sign)
    return psi0 @ inv_unimodular(local) @ inv_unimodular(psi0)


def error_jump_limit(z, x: float, t: float, cfg: SpectralConfig,
                     side_hint: int | None = None) -> np.ndarray:
    """Gap-closed limit of the error jump (needs beta = pi).

    Identity plus a rank-one nilpotent with a simple pole at the merged
    branch point.
    """
    sign = side_hint or (1 if z.imag >= 0 else -1)
    psi0 = outer_model(z, x, t, cfg)
    h = scale_constant(cfg)
    theta = flow_phase(z, x, t)
    if sign == 1:
        amp = h * np.exp(-1j * (2.0 * theta + cfg.alpha)) / (z - cfg.e3)
        nil = SIGMA_PLUS
    else:
        amp = -np.conj(h) * np.exp(1j * (2.0 * theta + cfg.alpha)) / (z - np.conj(cfg.e3))
        nil = SIGMA_MINUS
    return np.eye(2, dtype=complex) + amp * (psi0 @ nil @ inv_unimodular(psi0))
