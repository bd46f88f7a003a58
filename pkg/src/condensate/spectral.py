"""Branch-point geometry, cut-aware radicals and 2x2 matrix helpers.

All multivalued factors are quotients of principal roots of Moebius ratios
(z - p)/(z - q); such a ratio is a nonpositive real exactly on the segment
[q, p], so the principal branch is analytic everywhere else and no angle
tracking is needed.  Boundary values on the cuts are closed-form one-sided
limits, never tiny-offset approximations.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralError",
    "CutError",
    "SpectralConfig",
    "SegmentContour",
    "IDENTITY",
    "SIGMA1",
    "SIGMA2",
    "SIGMA3",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "principal_sqrt",
    "flow_phase",
    "curve_radical",
    "curve_radical_boundary",
    "curve_radical_near",
    "background_radical",
    "background_radical_boundary",
    "quartic_root",
    "quartic_root_boundary",
    "cayley_matrix",
]


class SpectralError(ValueError):
    """Invalid spectral data (branch points, domain violations)."""


class CutError(SpectralError):
    """Evaluation requested on a branch cut without a side flag."""


IDENTITY = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class SegmentContour:
    """Oriented straight segment from ``a`` to ``b``."""

    a: complex
    b: complex

    def __post_init__(self):
        if self.a == self.b:
            raise SpectralError("degenerate segment: endpoints coincide")

    @property
    def tangent(self) -> complex:
        d = self.b - self.a
        return d / abs(d)

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    def point(self, s):
        return self.a + np.asarray(s) * (self.b - self.a)

    def distance(self, z) -> float:
        d = self.b - self.a
        s = ((np.conj(d)) * (np.asarray(z) - self.a)).real / abs(d) ** 2
        s = np.clip(s, 0.0, 1.0)
        return np.min(np.abs(np.asarray(z) - (self.a + s * d)))

    def contains(self, z: complex, atol: float = 1e-12) -> bool:
        scale = max(1.0, self.length)
        return self.distance(z) <= atol * scale


@dataclass(frozen=True)
class SpectralConfig:
    """Branch points of the two-phase family and the two real phases.

    The three upper branch points are e1, e2 = e3 + epsilon, e3; the lower
    ones are their conjugates.  epsilon > 0 is the gap between the merging
    pair e2 -> e3.
    """

    e1: complex
    e3: complex
    epsilon: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "e1", complex(self.e1))
        object.__setattr__(self, "e3", complex(self.e3))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if not all(np.isfinite([self.e1.real, self.e1.imag, self.e3.real,
                                self.e3.imag, self.epsilon, self.alpha,
                                self.beta])):
            raise SpectralError("non-finite spectral data")
        if self.e1.imag <= 0 or self.e3.imag <= 0:
            raise SpectralError("branch points must have positive imaginary part: "
                                "Im(E1) > 0 and Im(E3) > 0")
        if self.e1.real <= self.e3.real:
            raise SpectralError("branch point ordering violated: Re(E1) > Re(E3)")
        if self.epsilon <= 0:
            raise SpectralError("epsilon must be positive")
        if self.e3.real + self.epsilon >= self.e1.real:
            raise SpectralError("epsilon too large: Re(E3) + epsilon < Re(E1) required "
                                "so the moving branch point stays clear of E1")
        if abs(self.beta) > np.pi:
            raise SpectralError("beta must lie in [-pi, pi]")

    @property
    def e2(self) -> complex:
        return self.e3 + self.epsilon

    def point(self, j: int) -> complex:
        """Branch point E_j for j in {±1, ±2, ±3}."""
        if j == 1:
            return self.e1
        if j == 2:
            return self.e2
        if j == 3:
            return self.e3
        if j in (-1, -2, -3):
            return self.point(-j).conjugate()
        raise SpectralError(f"no branch point with index {j}")

    # Oriented contour arcs, in the orientation of the full scattering contour.
    def arc(self, name: str) -> SegmentContour:
        arcs = {
            "shrinking_upper": SegmentContour(self.e2, self.e3),
            "connecting_upper": SegmentContour(self.e1, self.e2),
            "main": SegmentContour(self.point(-1), self.e1),
            "connecting_lower": SegmentContour(self.point(-2), self.point(-1)),
            "shrinking_lower": SegmentContour(self.point(-3), self.point(-2)),
        }
        try:
            return arcs[name]
        except KeyError:
            raise SpectralError(f"unknown arc {name!r}") from None

    def cuts(self) -> tuple[SegmentContour, ...]:
        """The three branch cuts of the curve radical."""
        return (self.arc("shrinking_upper"), self.arc("main"),
                self.arc("shrinking_lower"))


def principal_sqrt(z: complex) -> complex:
    """Principal square root; rejects the branch cut (-inf, 0]."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise SpectralError(f"principal_sqrt undefined on (-inf, 0]: z={z}")
    return cmath.sqrt(z)


def flow_phase(z, x: float, t: float):
    """Quadratic phase 2 t z^2 + x z driving all x,t dependence."""
    z = np.asarray(z) if isinstance(z, np.ndarray) else z
    return 2.0 * t * z * z + x * z


def _ratio_sqrt(z, p, q):
    # principal sqrt of (z-p)/(z-q); cut on the segment [q, p]
    return np.sqrt((z - p) / (z - q))


def _boundary_sign(z, p: complex, q: complex, tangent: complex, side: int) -> int:
    """Sign of Im of the ratio (z-p)/(z-q) just off the cut.

    ``tangent`` is the orientation of the contour arc the caller works with,
    ``side`` is +1 for its left side and -1 for its right side.  First-order
    displacement: Im w(z + i*side*tangent*h) ~ h*side*Re(tangent * w'(z)).
    """
    w_prime = (p - q) / (z - q) ** 2
    s = side * (tangent * w_prime).real
    if s == 0.0:
        raise CutError("boundary side is tangent to the cut")
    return 1 if s > 0 else -1


def _ratio_power_boundary(z, p, q, exponent, tangent, side):
    """One-sided value of ((z-p)/(z-q))**exponent for z on the open cut (q,p)."""
    w = (z - p) / (z - q)
    mag = abs(w) ** exponent
    sgn = _boundary_sign(z, p, q, tangent, side)
    return mag * cmath.exp(1j * cmath.pi * exponent * sgn)


def curve_radical(z, cfg: SpectralConfig, check: bool = True):
    """Branch of sqrt of prod (z-E_j)(z-E_{-j}), monic cubic at infinity.

    Analytic off the three cuts; equals the sheet-+ value of the genus-2
    curve coordinate w.
    """
    if check and np.isscalar(z):
        for cut in cfg.cuts():
            if cut.contains(z):
                raise CutError("curve_radical evaluated on a cut; use "
                               "curve_radical_boundary")
    e1, e2, e3 = cfg.e1, cfg.e2, cfg.e3
    em1, em2, em3 = e1.conjugate(), e2.conjugate(), e3.conjugate()
    pref = (z - e2) * (z - em1) * (z - em3)
    return (pref * _ratio_sqrt(z, e3, e2) * _ratio_sqrt(z, e1, em1)
            * _ratio_sqrt(z, em2, em3))


def curve_radical_boundary(z: complex, cfg: SpectralConfig, cut: str, side: int) -> complex:
    """One-sided value of the curve radical on an open cut.

    ``cut`` is one of ``shrinking_upper``, ``main``, ``shrinking_lower``;
    ``side`` is +1/-1 for the left/right of the arc orientation.
    """
    e1, e2, e3 = cfg.e1, cfg.e2, cfg.e3
    em1, em2, em3 = e1.conjugate(), e2.conjugate(), e3.conjugate()
    pref = (z - e2) * (z - em1) * (z - em3)
    arc = cfg.arc(cut)
    factors = {
        "shrinking_upper": (e3, e2),
        "main": (e1, em1),
        "shrinking_lower": (em2, em3),
    }
    if cut not in factors:
        raise SpectralError(f"unknown cut {cut!r}")
    out = pref
    for name, (p, q) in factors.items():
        if name == cut:
            out *= _ratio_power_boundary(z, p, q, 0.5, arc.tangent, side)
        else:
            out *= _ratio_sqrt(z, p, q)
    return out


def curve_radical_near(j: int, delta, cfg: SpectralConfig):
    """Curve radical at z = E_j + delta with the vanishing factor computed
    from delta directly.

    Recomputing z - E_j from the rounded sum loses all relative accuracy
    once |delta| drops below ~1e-16 |E_j|; feeding the exact offset keeps
    the square-root factor clean arbitrarily close to the branch point.
    """
    e1, e2, e3 = cfg.e1, cfg.e2, cfg.e3
    em1, em2, em3 = e1.conjugate(), e2.conjugate(), e3.conjugate()
    e = cfg.point(j)
    z = e + np.asarray(delta)
    pre1, pre2, pre3 = z - e2, z - em1, z - em3
    r1 = (z - e3) / (z - e2)
    r2 = (z - e1) / (z - em1)
    r3 = (z - em2) / (z - em3)
    if j == 1:
        r2 = delta / (z - em1)
    elif j == 2:
        pre1 = delta
        r1 = (delta + (e2 - e3)) / delta
    elif j == 3:
        r1 = delta / (delta + (e3 - e2))
    elif j == -1:
        pre2 = delta
        r2 = (z - e1) / delta
    elif j == -2:
        r3 = delta / (z - em3)
    elif j == -3:
        pre3 = delta
        r3 = (z - em2) / delta
    else:
        raise SpectralError(f"no branch point with index {j}")
    return pre1 * pre2 * pre3 * np.sqrt(r1) * np.sqrt(r2) * np.sqrt(r3)


def background_radical(z, cfg: SpectralConfig, check: bool = True):
    """sqrt of (z-E1)(z-E_{-1}) cut along [E_{-1},E1], behaving like z at infinity."""
    if check and np.isscalar(z) and cfg.arc("main").contains(z):
        raise CutError("background_radical evaluated on the cut; use the boundary variant")
    em1 = cfg.e1.conjugate()
    return (z - em1) * _ratio_sqrt(z, cfg.e1, em1)


def background_radical_boundary(z: complex, cfg: SpectralConfig, side: int) -> complex:
    arc = cfg.arc("main")
    em1 = cfg.e1.conjugate()
    return (z - em1) * _ratio_power_boundary(z, cfg.e1, em1, 0.5, arc.tangent, side)


_QUARTIC_DATA = {
    0: ("main", 0.25),
    1: ("shrinking_upper", 0.25),
    -1: ("shrinking_lower", -0.25),
}


def _quartic_pq(cfg: SpectralConfig, which: int):
    if which == 0:
        return cfg.e1, cfg.e1.conjugate()
    if which == 1:
        return cfg.e3, cfg.e2
    if which == -1:
        return cfg.e3.conjugate(), cfg.e2.conjugate()
    raise SpectralError(f"quartic_root index must be 0 or ±1, got {which}")


def quartic_root(z, cfg: SpectralConfig, which: int, check: bool = True):
    """Fourth root of the cut-endpoint Moebius ratio feeding the Cayley matrix.

    which=0 uses (z-E1)/(z-E_{-1}); which=±1 uses the shrinking-cut ratio
    with exponent ±1/4.  Analytic off the owning cut, tends to 1 at infinity.
    """
    cut, expo = _QUARTIC_DATA[which] if which in _QUARTIC_DATA else (None, None)
    if cut is None:
        raise SpectralError(f"quartic_root index must be 0 or ±1, got {which}")
    if check and np.isscalar(z) and cfg.arc(cut).contains(z):
        raise CutError("quartic_root evaluated on its cut; use the boundary variant")
    p, q = _quartic_pq(cfg, which)
    w = (np.asarray(z) - p) / (np.asarray(z) - q) if isinstance(z, np.ndarray) else (z - p) / (z - q)
    return np.power(w, expo) if isinstance(w, np.ndarray) else w ** expo


def quartic_root_boundary(z: complex, cfg: SpectralConfig, which: int, side: int) -> complex:
    """One-sided quartic_root on the owning cut (side w.r.t. contour orientation)."""
    cut, expo = _QUARTIC_DATA[which]
    p, q = _quartic_pq(cfg, which)
    arc = cfg.arc(cut)
    return _ratio_power_boundary(z, p, q, expo, arc.tangent, side)


def cayley_matrix(mu: complex) -> np.ndarray:
    """Unimodular 2x2 built from mu: [[(mu+1/mu)/2, i(mu-1/mu)/2], [(mu-1/mu)/2i, ...]]."""
    mu = complex(mu)
    if mu == 0:
        raise SpectralError("cayley_matrix undefined at mu = 0")
    c = 0.5 * (mu + 1.0 / mu)
    s = 0.5 * (mu - 1.0 / mu)
    return np.array([[c, 1j * s], [-1j * s, c]])
