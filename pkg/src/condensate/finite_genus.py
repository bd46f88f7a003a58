"""Finite-gap reference solution: genus-2 curve data and the theta-function
field.

The hyperelliptic curve shares its branch function with the spectral core;
a-cycles encircle the two shrinking cuts, b-cycles run between pairs of
branch points across the spectral gaps (upper: E1 -> E2, lower: the mirror
image), where sheet closure is automatic and a cycle integral is twice the
open-path integral.  The b orientation is fixed so the period matrix has
negative-definite real part.

Normalized second/third-kind differentials are assembled from the power
series of the curve radical at infinity plus zero-a-period conditions; the
carrier constants come from regularized abelian integrals with explicit
tail corrections, making the large-radius limits exact up to quadrature
error.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import (DEFAULT_RULE, QuadratureError, QuadratureRule,
                         adaptive_line_integral, cut_moment)
from .spectral import (SegmentContour, SpectralConfig, SpectralError,
                       curve_radical, curve_radical_near)

__all__ = [
    "FiniteGenusError",
    "HomologyPaths",
    "default_homology",
    "curve_w",
    "raw_a_periods",
    "holomorphic_basis",
    "period_matrix",
    "abelian_differentials",
    "expansion_constants",
    "phase_vectors",
    "ThetaSolutionData",
    "build_theta_data",
    "theta_truncation",
    "theta_sum",
    "q_theta",
    "theta_field",
]


class FiniteGenusError(RuntimeError):
    """Curve-data construction failed (symmetry, definiteness, convergence)."""


@dataclass(frozen=True)
class HomologyPaths:
    """Cycle realization: a-cuts to encircle, b-paths across the gaps.

    b-paths start and end at branch points (interior waypoints optional);
    the lower data must be the conjugate image of the upper.
    """

    a1_cut: SegmentContour
    a2_cut: SegmentContour
    b1_path: tuple
    b2_path: tuple

    def __post_init__(self):
        object.__setattr__(self, "b1_path", tuple(complex(p) for p in self.b1_path))
        object.__setattr__(self, "b2_path", tuple(complex(p) for p in self.b2_path))
        if len(self.b1_path) < 2 or len(self.b2_path) != len(self.b1_path):
            raise FiniteGenusError("b-paths need >= 2 vertices and equal lengths")
        # mirror symmetry: the conjugate of a1 is a2 reversed (the involution
        # flips cycle orientation), b2 is the plain conjugate of b1
        conj_ok = (abs(self.a2_cut.b - self.a1_cut.a.conjugate()) < 1e-12
                   and abs(self.a2_cut.a - self.a1_cut.b.conjugate()) < 1e-12
                   and all(abs(p2 - p1.conjugate()) < 1e-12
                           for p1, p2 in zip(self.b1_path, self.b2_path)))
        if not conj_ok:
            raise FiniteGenusError("lower cycle data must be the mirror image "
                                   "of the upper")


def default_homology(cfg: SpectralConfig) -> HomologyPaths:
    b1 = (cfg.e1, cfg.e2)
    return HomologyPaths(
        a1_cut=cfg.arc("shrinking_upper"),
        a2_cut=cfg.arc("shrinking_lower"),
        b1_path=b1,
        b2_path=tuple(p.conjugate() for p in b1),
    )


def curve_w(z, cfg: SpectralConfig, check: bool = True):
    """Sheet-+ value of the curve coordinate; same branch as the radical."""
    return curve_radical(z, cfg, check=check)


# ---------------------------------------------------------------------------
# Cycle integrals.

_B_SHEET_FACTOR = -2.0  # orientation fixed by Re(period matrix) < 0


def _branch_index(cfg: SpectralConfig, point: complex) -> int:
    for j in (1, 2, 3, -1, -2, -3):
        if abs(cfg.point(j) - point) < 1e-12:
            return j
    raise FiniteGenusError(f"path endpoint {point} is not a branch point")


def _polyval(coeffs, z):
    acc = np.zeros_like(np.asarray(z, dtype=complex))
    for c in np.asarray(coeffs, dtype=complex)[::-1]:
        acc = acc * z + c
    return acc


def _poly_over_w(cfg: SpectralConfig, coeffs):
    """Vectorized z -> P(z)/w(z) with P given by ascending coefficients."""
    def f(z):
        return _polyval(coeffs, z) / curve_radical(z, cfg, check=False)

    return f


def _endpoint_leg(cfg, coeffs, endpoint: complex, outer: complex,
                  tol: float) -> complex:
    """Leg of int P/w dz leaving a branch point.

    The u^2 map removes the inverse-square-root endpoint; the radical sees
    the exact offset so nodes may approach the branch point freely.
    """
    j = _branch_index(cfg, endpoint)
    d = outer - endpoint

    def g(u):
        delta = d * (u * u)
        z = endpoint + delta
        return _polyval(coeffs, z) / curve_radical_near(j, delta, cfg) * (2.0 * u * d)

    return adaptive_line_integral(g, 0.0, 1.0, tol)


def _straight_leg(cfg, coeffs, a: complex, b: complex, tol: float) -> complex:
    d = b - a
    f = _poly_over_w(cfg, coeffs)

    def g(s):
        return f(a + s * d) * d

    return adaptive_line_integral(g, 0.0, 1.0, tol)


def _gap_path_integral(cfg, coeffs, path, tol: float) -> complex:
    """Open-path integral of P/w when both path ends are branch points."""
    pts = [complex(p) for p in path]
    if len(pts) == 2:
        mid = 0.5 * (pts[0] + pts[1])
        pts = [pts[0], mid, pts[1]]
    total = _endpoint_leg(cfg, coeffs, pts[0], pts[1], tol)
    for a, b in zip(pts[1:-2], pts[2:-1]):
        total += _straight_leg(cfg, coeffs, a, b, tol)
    total -= _endpoint_leg(cfg, coeffs, pts[-1], pts[-2], tol)
    return total


def _b_cycle(cfg, coeffs, path, tol: float) -> complex:
    return _B_SHEET_FACTOR * _gap_path_integral(cfg, coeffs, path, tol)


# ---------------------------------------------------------------------------
# a-periods and the normalized holomorphic basis.

def raw_a_periods(cfg: SpectralConfig, max_power: int,
                  rule: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """Periods of z^l dz / w over the two a-cycles, l = 0..max_power.

    A loop around a cut collapses to twice the one-sided cut integral.
    """
    out = np.zeros((2, max_power + 1), dtype=complex)
    for j, arc in enumerate(("shrinking_upper", "shrinking_lower")):
        for l in range(max_power + 1):
            out[j, l] = 2.0 * cut_moment(cfg, arc, l, rule)
    return out


def holomorphic_basis(cfg: SpectralConfig,
                      rule: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """Coefficients C with omega_k = (C[k,0] + C[k,1] z) dz / w and
    a_j-periods 2 pi i delta_jk."""
    p = raw_a_periods(cfg, 1, rule)
    if abs(np.linalg.det(p)) < 1e-14:
        raise FiniteGenusError("degenerate a-period matrix")
    c = 2j * np.pi * np.linalg.inv(p).T
    resid = np.abs(p @ c.T - 2j * np.pi * np.eye(2)).max()
    if resid > 1e-10:
        raise FiniteGenusError(f"holomorphic normalization residual {resid:.2e}")
    return c


def period_matrix(cfg: SpectralConfig, paths: HomologyPaths | None = None,
                  rule: QuadratureRule = DEFAULT_RULE,
                  symmetry_tol: float = 1e-6) -> np.ndarray:
    """b-periods of the normalized holomorphic differentials.

    Symmetric with negative-definite real part; violations signal wrong
    path or sheet bookkeeping and raise.
    """
    paths = paths or default_homology(cfg)
    c = holomorphic_basis(cfg, rule)
    b = np.zeros((2, 2), dtype=complex)
    for j, path in enumerate((paths.b1_path, paths.b2_path)):
        for k in range(2):
            b[j, k] = _b_cycle(cfg, c[k], path, rule.tol)
    if abs(b[0, 1] - b[1, 0]) > symmetry_tol:
        raise FiniteGenusError(
            f"period matrix asymmetry {abs(b[0,1]-b[1,0]):.2e}: wrong "
            "path/sheet bookkeeping")
    eigs = np.linalg.eigvalsh(0.5 * (b.real + b.real.T))
    if eigs.max() >= 0:
        raise FiniteGenusError(
            f"real part of the period matrix is not negative definite ({eigs})")
    return b


# ---------------------------------------------------------------------------
# Second- and third-kind differentials and their constants.

def _curve_poly_coeffs(cfg: SpectralConfig) -> np.ndarray:
    """Ascending real coefficients of prod (z-E_j)(z-E_{-j})."""
    poly = np.array([1.0])
    for j in (1, 2, 3):
        e = cfg.point(j)
        quad = np.array([abs(e) ** 2, -2.0 * e.real, 1.0])
        poly = np.convolve(poly, quad)
    return poly


def _inv_radical_series(cfg: SpectralConfig, order: int) -> np.ndarray:
    """Series of z^3 / w(z) in u = 1/z up to u^order (sheet +)."""
    poly = _curve_poly_coeffs(cfg)          # ascending, degree 6, monic
    p_u = poly[::-1]                        # p(u) = sum poly[6-m] u^m, p(0)=1
    h = np.zeros(order + 1)
    h[0] = 1.0
    for k in range(1, order + 1):          # h = sqrt(p): p_k = sum h_i h_{k-i}
        acc = p_u[k] if k < len(p_u) else 0.0
        acc -= sum(h[i] * h[k - i] for i in range(1, k))
        h[k] = 0.5 * acc
    inv = np.zeros(order + 1)
    inv[0] = 1.0
    for k in range(1, order + 1):
        inv[k] = -sum(h[j] * inv[k - j] for j in range(1, k + 1))
    return inv


@dataclass(frozen=True)
class AbelianBasis:
    """Ascending polynomial coefficients of the three normalized kinds:
    flow (leading z^3), acceleration (leading 4z^4), logarithmic (leading z^2)."""

    flow: np.ndarray
    acceleration: np.ndarray
    logarithmic: np.ndarray


def abelian_differentials(cfg: SpectralConfig,
                          rule: QuadratureRule = DEFAULT_RULE) -> AbelianBasis:
    """Zero-a-period differentials with prescribed growth at infinity.

    Conditions: vanishing a-periods for all three; additionally the 1/z term
    (and for the second kind the constant term) of P/w must vanish so the
    abelian integrals have pure z, z^2 and log z leading behaviour.
    """
    inv = _inv_radical_series(cfg, 4)
    p = raw_a_periods(cfg, 4, rule)

    # series coefficient of u^m in z^l / w is inv[m - (3 - l)] (l <= 3+m)
    def series_coeff(l: int, m: int) -> float:
        idx = m - (3 - l)
        return inv[idx] if 0 <= idx <= 4 else 0.0

    # flow kind: z^3 + x2 z^2 + x1 z + x0, conditions: a-periods, u^1 coeff
    lhs = np.array([
        [p[0, 2], p[0, 1], p[0, 0]],
        [p[1, 2], p[1, 1], p[1, 0]],
        [series_coeff(2, 1), series_coeff(1, 1), series_coeff(0, 1)],
    ], dtype=complex)
    rhs = -np.array([p[0, 3], p[1, 3], series_coeff(3, 1)], dtype=complex)
    x2, x1, x0 = np.linalg.solve(lhs, rhs)
    flow = np.array([x0, x1, x2, 1.0])

    # acceleration kind: 4z^4 + y3 z^3 + ... + y0; u^0 and u^1 coeffs vanish
    lhs = np.array([
        [p[0, 3], p[0, 2], p[0, 1], p[0, 0]],
        [p[1, 3], p[1, 2], p[1, 1], p[1, 0]],
        [series_coeff(3, 0), series_coeff(2, 0), series_coeff(1, 0), series_coeff(0, 0)],
        [series_coeff(3, 1), series_coeff(2, 1), series_coeff(1, 1), series_coeff(0, 1)],
    ], dtype=complex)
    rhs = -4.0 * np.array([p[0, 4], p[1, 4], series_coeff(4, 0),
                           series_coeff(4, 1)], dtype=complex)
    y3, y2, y1, y0 = np.linalg.solve(lhs, rhs)
    acceleration = np.array([y0, y1, y2, y3, 4.0])

    # logarithmic kind: z^2 + w1 z + w0, zero a-periods only
    lhs = np.array([[p[0, 1], p[0, 0]], [p[1, 1], p[1, 0]]], dtype=complex)
    rhs = -np.array([p[0, 2], p[1, 2]], dtype=complex)
    w1, w0 = np.linalg.solve(lhs, rhs)
    logarithmic = np.array([w0, w1, 1.0])

    return AbelianBasis(flow=flow, acceleration=acceleration,
                        logarithmic=logarithmic)


def _detrended_tail(cfg: SpectralConfig, coeffs, leading: str):
    """Stable z -> P/w - leading'(z), rationalized to kill the cancellation.

    P/w - g = (P^2 - g^2 w^2) / (w (P + g w)); the numerator is an explicit
    polynomial whose top coefficients vanish by the normalization conditions
    and are zeroed exactly, so the decay at infinity is clean.
    """
    curve = _curve_poly_coeffs(cfg).astype(complex)
    p = np.asarray(coeffs, dtype=complex)

    if leading == "linear":          # g = 1
        diff = np.convolve(p, p)
        diff[: len(curve)] -= curve
        diff[5:] = 0.0

        def f(z):
            w = curve_radical(z, cfg, check=False)
            return _polyval(diff, z) / (w * (_polyval(p, z) + w))
    elif leading == "quadratic":     # g = 4z
        diff = np.convolve(p, p)
        shifted = np.concatenate([[0.0, 0.0], 16.0 * curve])
        diff -= shifted[: len(diff)]
        diff[6:] = 0.0

        def f(z):
            w = curve_radical(z, cfg, check=False)
            return _polyval(diff, z) / (w * (_polyval(p, z) + 4.0 * z * w))
    elif leading == "log":           # g = 1/z
        diff = np.convolve(np.convolve(p, p), [0.0, 0.0, 1.0])
        diff[: len(curve)] -= curve
        diff[6:] = 0.0

        def f(z):
            w = curve_radical(z, cfg, check=False)
            return _polyval(diff, z) / (z * w * (z * _polyval(p, z) + w))
    else:
        raise ValueError(leading)
    return f


def _regularized_limit(cfg: SpectralConfig, coeffs, leading: str,
                       radius: float, tol: float) -> complex:
    """lim (int_{E_{-1}}^{Z} P/w dz - leading(Z)) with an exact tail.

    The path runs from the lower main branch point straight down, then out
    to Z = radius * exp(-i pi/4); the tail integral of (P/w - leading')
    from Z to infinity makes the value radius-independent up to quadrature
    error.
    """
    em1 = cfg.e1.conjugate()
    scale = max(abs(cfg.e1), abs(cfg.e3), 1.0)
    c0 = em1 - 2j * scale
    z_far = radius * scale * np.exp(-0.25j * np.pi)
    detrended = _detrended_tail(cfg, coeffs, leading)

    total = _endpoint_leg(cfg, coeffs, em1, c0, tol)
    total += _straight_leg(cfg, coeffs, c0, z_far, tol)

    def tail(u):
        z = z_far / u
        return detrended(z) * z_far / (u * u)

    lead_val = {"linear": z_far, "quadratic": 2.0 * z_far ** 2,
                "log": np.log(z_far)}[leading]
    total += adaptive_line_integral(tail, 0.0, 1.0, tol)
    return total - lead_val


def expansion_constants(cfg: SpectralConfig,
                        basis: AbelianBasis | None = None,
                        rule: QuadratureRule = DEFAULT_RULE,
                        reality_tol: float = 1e-8,
                        sweep_tol: float = 1e-6):
    """Carrier wavenumber, frequency and the pinch constant from the
    regularized abelian integrals; checks radius independence and reality."""
    basis = basis or abelian_differentials(cfg, rule)
    vals = {}
    for name, coeffs, leading in (("flow", basis.flow, "linear"),
                                  ("acceleration", basis.acceleration, "quadratic"),
                                  ("logarithmic", basis.logarithmic, "log")):
        v1 = _regularized_limit(cfg, coeffs, leading, 1e3, rule.tol)
        v2 = _regularized_limit(cfg, coeffs, leading, 1e4, rule.tol)
        if abs(v1 - v2) > sweep_tol:
            raise FiniteGenusError(
                f"regularized {name} limit not radius-independent "
                f"({abs(v1-v2):.2e})")
        vals[name] = v2

    e_const = -2.0 * vals["flow"]
    n_const = 2.0 * vals["acceleration"]
    omega0 = np.exp(-2.0 * vals["logarithmic"])
    if abs(e_const.imag) > reality_tol or abs(n_const.imag) > reality_tol:
        raise FiniteGenusError(
            f"carrier constants not real: Im = {e_const.imag:.2e}, "
            f"{n_const.imag:.2e}")
    return float(e_const.real), float(n_const.real), complex(omega0)


def phase_vectors(cfg: SpectralConfig, paths: HomologyPaths | None = None,
                  basis: AbelianBasis | None = None,
                  rule: QuadratureRule = DEFAULT_RULE,
                  constraint_tol: float = 1e-8):
    """b-periods of the three kinds: wave vector, frequency vector and the
    crest offset (the latter with a minus sign)."""
    paths = paths or default_homology(cfg)
    basis = basis or abelian_differentials(cfg, rule)
    out = []
    for coeffs, sign in ((basis.flow, 1.0), (basis.acceleration, 1.0),
                         (basis.logarithmic, -1.0)):
        vec = np.array([sign * _b_cycle(cfg, coeffs, paths.b1_path, rule.tol),
                        sign * _b_cycle(cfg, coeffs, paths.b2_path, rule.tol)])
        out.append(vec)
    v_vec, w_vec, r_vec = out
    for name, vec in (("wave", v_vec), ("frequency", w_vec), ("offset", r_vec)):
        defect = abs(vec[1] - np.conj(vec[0]))
        if defect > constraint_tol * max(1.0, abs(vec[0])):
            raise FiniteGenusError(
                f"{name} vector breaks conjugation symmetry ({defect:.2e}); "
                "wrong homology realization")
    return v_vec, w_vec, r_vec


# ---------------------------------------------------------------------------
# Theta function and the finite-gap field.

@dataclass(frozen=True)
class ThetaSolutionData:
    """Everything q needs: period matrix, phase vectors, carrier constants."""

    period_matrix: np.ndarray
    v_vec: np.ndarray
    w_vec: np.ndarray
    r_vec: np.ndarray
    d_vec: np.ndarray
    e_const: float
    n_const: float
    omega0: complex
    amplitude: float
    phase_c: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.amplitude <= 0:
            raise FiniteGenusError("amplitude must be positive")
        if abs(abs(self.phase_c) - 1.0) > 1e-12:
            raise FiniteGenusError("phase constant must be unimodular")


@lru_cache(maxsize=16)
def _cached_theta_data(cfg: SpectralConfig, rule: QuadratureRule) -> ThetaSolutionData:
    return build_theta_data(cfg, rule=rule)


def build_theta_data(cfg: SpectralConfig, paths: HomologyPaths | None = None,
                     rule: QuadratureRule = DEFAULT_RULE) -> ThetaSolutionData:
    paths = paths or default_homology(cfg)
    basis = abelian_differentials(cfg, rule)
    bmat = period_matrix(cfg, paths, rule)
    v_vec, w_vec, r_vec = phase_vectors(cfg, paths, basis, rule)
    e_const, n_const, omega0 = expansion_constants(cfg, basis, rule)
    d_vec = (2j * np.pi * np.array([cfg.alpha, cfg.alpha]) / (2.0 * np.pi)
             + bmat @ np.array([cfg.beta, -cfg.beta]) / (2.0 * np.pi))
    return ThetaSolutionData(
        period_matrix=bmat, v_vec=v_vec, w_vec=w_vec, r_vec=r_vec, d_vec=d_vec,
        e_const=e_const, n_const=n_const, omega0=omega0,
        amplitude=2.0 * np.sqrt(abs(omega0)),
    )


def theta_truncation(bmat: np.ndarray, re_norm: float, tol: float = 1e-12,
                     max_trunc: int = 400) -> int:
    """Smallest box radius whose discarded shells are analytically below tol.

    Shell m has at most 8m points with |n|_2 >= m and |n|_2 <= sqrt(2) m, so
    each term is bounded by exp(lam_max m^2 / 2 + sqrt(2) re_norm m) with
    lam_max the largest (least negative) eigenvalue of Re B.
    """
    lam = np.linalg.eigvalsh(0.5 * (bmat.real + bmat.real.T)).max()
    if lam >= 0:
        raise FiniteGenusError("period matrix real part must be negative definite")

    def shell_bound(m):
        return 8.0 * m * np.exp(0.5 * lam * m * m + np.sqrt(2.0) * re_norm * m)

    # largest retained term sets the relative scale
    ms = np.arange(1, max_trunc + 1)
    exps = 0.5 * lam * ms ** 2 + np.sqrt(2.0) * re_norm * ms
    peak = max(1.0, float(np.exp(exps.max())))
    for t in range(2, max_trunc):
        tail = 0.0
        m = t + 1
        while True:
            term = shell_bound(m)
            tail += term
            if term < 1e-3 * tol * peak or m > t + 1000:
                break
            m += 1
        if tail <= tol * peak:
            return t
    raise FiniteGenusError("theta truncation bound not reachable; "
                            "period matrix too flat")


@lru_cache(maxsize=32)
def _lattice(trunc: int):
    rng = np.arange(-trunc, trunc + 1)
    n1, n2 = np.meshgrid(rng, rng, indexing="ij")
    return np.column_stack([n1.ravel(), n2.ravel()]).astype(float)


def theta_sum(zvec, bmat: np.ndarray, trunc: int | None = None,
              tol: float = 1e-12) -> complex:
    """Genus-2 theta value: sum over the integer lattice of
    exp(<n, B n>/2 + <n, z>), truncated to a certified box."""
    z = np.asarray(zvec, dtype=complex).reshape(2)
    if trunc is None:
        trunc = theta_truncation(bmat, float(np.linalg.norm(z.real)), tol)
    lat = _lattice(trunc)
    quad = 0.5 * np.einsum("ni,ij,nj->n", lat, bmat, lat)
    expo = quad + lat @ z
    # fixed lattice order keeps grid evaluation bit-stable
    return complex(np.sum(np.exp(expo)))


def q_theta(x: float, t: float, cfg: SpectralConfig,
            data: ThetaSolutionData | None = None,
            rule: QuadratureRule = DEFAULT_RULE,
            pole_tol: float = 1e-10) -> complex:
    """The finite-gap field at one point.

    Raises ZeroDivisionError near a theta zero (a pole of |q|); grid
    evaluators catch this and mark the point instead.
    """
    data = data or _cached_theta_data(cfg, rule)
    zvec = 1j * data.v_vec * x + 1j * data.w_vec * t - data.d_vec
    den = theta_sum(zvec, data.period_matrix)
    num = theta_sum(zvec + data.r_vec, data.period_matrix)
    scale = max(abs(num), 1.0)
    if abs(den) < pole_tol * scale:
        raise ZeroDivisionError(
            f"theta denominator vanishes near (x,t)=({x},{t}): pole of |q|")
    carrier = np.exp(1j * (-data.e_const * x + data.n_const * t))
    return data.amplitude * data.phase_c * (num / den) * carrier


def theta_field(cfg: SpectralConfig, rule: QuadratureRule = DEFAULT_RULE):
    """Grid-friendly sampler; data built once, points evaluated lazily."""
    data = _cached_theta_data(cfg, rule)

    def sampler(x, t):
        return q_theta(float(x), float(t), cfg, data, rule)

    return sampler
