"""Large-deviations rate functions for extreme eigenvalues.

Covers the Wigner and Wishart universality rates, the Legendre-type duality
linking them to the spherical integral, the BBP outlier map, the rates of
finite-rank perturbed GOE/GUE and Wishart ensembles, annealed spherical
integrals (Wishart and variance-profile), and outlier point-process
interval costs.

Normalization notes (the source material alternates between two
conventions, so every beta-dependent output states its own):

* ``wigner_rate`` and ``wishart_rate`` carry their beta prefactors
  (beta/2 resp. beta/(4(1+alpha))).
* ``perturbed_wigner_rate`` returns the beta-free scalar I_theta(x); the
  k-vector rate is beta * sum I_theta_i(x_i) (see
  ``perturbed_wigner_rate_vector``). Inside I_theta the spherical-integral
  term enters with coefficient 1/2: the tilt density contributes
  (beta/2) J while the eigenvalue cost contributes beta * I, and only this
  ratio puts the rate minimum at the BBP location theta + 1/theta.
* ``perturbed_wishart_rate`` carries beta (both of its ingredients do); its
  tilt map is gamma/(alpha(1+gamma)) with coefficient (beta/4) alpha/(1+alpha),
  the unique normalization under which the rate stays coercive on all of
  gamma > -1 and vanishes at the classical spiked-covariance outlier
  location (detachment thresholds gamma = +-sqrt(alpha)).
* ``annealed_lambda_wishart`` and ``annealed_lambda_profile`` return values
  WITHOUT the beta/2 prefactor of the annealed log-Laplace limit.

All rate functions return +inf as an explicit sentinel rather than raising,
so grid sweeps can render them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.linalg import null_space

from .errors import AssumptionError, ConvergenceError, DomainError, NumericalError
from .measures import MarchenkoPastur, Semicircle, log_potential
from .spherical import j_one

__all__ = [
    "VarianceProfile",
    "check_beta",
    "wigner_rate",
    "wishart_rate",
    "legendre_check_wigner",
    "bbp_outlier",
    "theta_for_outlier",
    "perturbed_wigner_rate",
    "perturbed_wigner_argmin",
    "perturbed_wigner_rate_vector",
    "perturbed_wishart_rate",
    "annealed_lambda_wishart",
    "annealed_lambda_profile",
    "assumption_neg_check",
    "profile_discretize",
    "outlier_interval_cost",
    "golden_section_max",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_SEMICIRCLE = Semicircle()


def check_beta(beta: int) -> int:
    if beta not in (1, 2):
        raise DomainError(f"beta must be 1 (real) or 2 (complex), got {beta!r}")
    return int(beta)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
                       prefer_right: bool = True) -> tuple[float, float]:
    """Golden-section maximizer of a unimodal f on [lo, hi] -> (x*, f(x*)).

    Ties keep the right subinterval by default: the Legendre objective is
    flat at its left plateau and a left-biased rule would discard the max.
    """
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    # near-ties (plateau floating-point noise) also go right under prefer_right
    tie = 1e-12 if prefer_right else 0.0
    while b - a > tol:
        take_right = fd > fc - tie
        if take_right:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
    x = 0.5 * (a + b)
    return x, f(x)


def _golden_min(f, lo, hi, tol=1e-10):
    x, v = golden_section_max(lambda t: -f(t), lo, hi, tol=tol, prefer_right=False)
    return x, -v


# ---------------------------------------------------------------------------
# Wigner


def wigner_rate(x: float, beta: int = 1) -> float:
    """(beta/2) int_2^{|x|} sqrt(t^2-4) dt for |x| >= 2; +inf inside (-2, 2).

    Closed-form antiderivative t sqrt(t^2-4)/2 - 2 ln((t + sqrt(t^2-4))/2).
    """
    check_beta(beta)
    a = abs(x)
    if a < 2.0:
        return math.inf
    s = math.sqrt(a * a - 4.0)
    return (beta / 2.0) * (a * s / 2.0 - 2.0 * math.log((a + s) / 2.0))


def bbp_outlier(theta: float) -> float:
    """Typical outlier location theta + 1/theta of a rank-one tilt; theta >= 1."""
    if theta < 1:
        raise DomainError("the outlier branch requires theta >= 1")
    return theta + 1.0 / theta


def theta_for_outlier(x: float) -> float:
    """Inverse BBP map: the tilt (x + sqrt(x^2-4))/2 >= 1 placing the outlier at x >= 2."""
    if x < 2:
        raise DomainError("outlier locations start at the support edge 2")
    return 0.5 * (x + math.sqrt(x * x - 4.0))


def legendre_check_wigner(x: float, theta_tol: float = 1e-10) -> float:
    """sup_{theta >= 0} { J(semicircle, theta, x) - theta^2/2 } by golden section.

    Equals int_2^x sqrt(t^2-4) dt, i.e. (2/beta) * wigner_rate(x, beta). The
    objective vanishes identically on [0, G(x)] (the sub-critical plateau,
    where J = theta^2/2 exactly) and is maximized at the BBP tilt; the search
    window [0, theta_for_outlier(x) + 1] always brackets the maximizer.
    """
    if x < 2:
        raise DomainError("x must be >= 2")
    g = lambda th: (j_one(_SEMICIRCLE, th, x).value - th * th / 2.0) if th > 0 else 0.0
    hi = theta_for_outlier(x) + 1.0
    _, val = golden_section_max(g, 0.0, hi, tol=theta_tol)
    if not math.isfinite(val):
        raise ConvergenceError("Legendre maximization failed")
    return val


def _wigner_potential(y: float) -> float:
    """I(y) = y^2/4 - int ln|y - t| dsigma(t) (no beta, not centered)."""
    return y * y / 4.0 - log_potential(_SEMICIRCLE, y)


@lru_cache(maxsize=512)
def _perturbed_wigner_center(theta: float) -> tuple[float, float]:
    """(argmin_y phi, min_y phi) with phi(y) = I(y) - (1/2) J(sigma, theta, y), y >= 2."""
    hi = 2.0 + 10.0 + 2.0 * abs(theta)  # coercivity window: quadratic growth wins
    phi = lambda y: _wigner_potential(y) - 0.5 * j_one(_SEMICIRCLE, theta, y).value
    x, v = _golden_min(phi, 2.0, hi, tol=1e-12)
    for y_edge in (2.0,):  # the sub-critical minimum sits exactly at the edge
        if phi(y_edge) < v:
            x, v = y_edge, phi(y_edge)
    return x, v


def perturbed_wigner_rate(x: float, theta: float, beta: int = 1) -> float:
    """Scalar rate I_theta(x) for one eigenvalue of a rank-one tilted GOE/GUE.

    I_theta(x) = [I(x) - (1/2) J(sigma, theta, x)] - inf_y [same], with
    I(y) = y^2/4 - int ln|y-t| dsigma(t). Beta-free: the k-vector rate is
    beta * sum_i I_theta_i(x_i). theta <= 0 mirrors through x -> -x. +inf
    inside (-2, 2) and on the wrong side of the bulk for the tilt sign.
    """
    check_beta(beta)
    if theta < 0 or (theta == 0 and x < 0):
        return perturbed_wigner_rate(-x, -theta, beta)
    if x < 2.0:
        # inside the bulk, or on the wrong side of it for this tilt sign
        return math.inf
    _, vmin = _perturbed_wigner_center(theta)
    phi = _wigner_potential(x) - 0.5 * j_one(_SEMICIRCLE, theta, x).value
    return max(0.0, phi - vmin)


def perturbed_wigner_argmin(theta: float) -> float:
    """Location of the zero of the perturbed rate (the typical top eigenvalue)."""
    if theta < 0:
        return -perturbed_wigner_argmin(-theta)
    return _perturbed_wigner_center(theta)[0]


def perturbed_wigner_rate_vector(xs: Sequence[float], thetas: Sequence[float], beta: int = 1) -> float:
    """Full k-vector rate beta * sum_i I_theta_i(x_i) of the tilted ensemble."""
    check_beta(beta)
    if len(xs) != len(thetas):
        raise DomainError("xs and thetas must have equal length")
    return beta * sum(perturbed_wigner_rate(x, th, beta) for x, th in zip(xs, thetas))


# ---------------------------------------------------------------------------
# Wishart


def _mp_edge_integral(mp: MarchenkoPastur, a: float, b: float) -> float:
    """int_a^b sqrt(|(y - l-)(y - l+)|)/y dy for [a, b] outside the bulk.

    Substitution y = edge +- s^2 removes the square-root endpoint
    singularity on whichever end touches the bulk.
    """
    lm, lp = mp.lam_minus, mp.lam_plus
    if a >= lp:  # upper side, singular at y = lp
        f = lambda s: 2.0 * s * s * math.sqrt(lp + s * s - lm) / (lp + s * s)
        val, err = quad(f, 0.0, math.sqrt(max(b - lp, 0.0)), limit=300, epsabs=1e-13, epsrel=1e-12)
    elif b <= lm:  # lower side, singular at y = lm
        f = lambda s: 2.0 * s * s * math.sqrt(lp - (lm - s * s)) / (lm - s * s)
        val, err = quad(f, 0.0, math.sqrt(max(lm - a, 0.0)), limit=300, epsabs=1e-13, epsrel=1e-12)
    else:
        raise DomainError("integration range must not meet the bulk")
    if err > 1e-9:
        raise NumericalError(f"edge integral error {err:g} above 1e-9")
    return val


def wishart_rate(x: float, alpha: float, beta: int = 1) -> float:
    """Largest-eigenvalue Wishart rate (beta/(4(1+alpha))) int_{l+}^x sqrt((y-l-)(y-l+))/y dy.

    Zero at the bulk edge l+ = (1+sqrt(alpha))^2, +inf below it. The lower
    integration limit is the upper bulk edge (the rate must vanish on the
    bulk; the integrand is imaginary inside it).
    """
    check_beta(beta)
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    mp = MarchenkoPastur(alpha)
    if x < mp.lam_plus:
        return math.inf
    if x == mp.lam_plus:
        return 0.0
    return beta / (4.0 * (1.0 + alpha)) * _mp_edge_integral(mp, mp.lam_plus, x)


def _wishart_edge_rate(mp: MarchenkoPastur, y: float, alpha: float, beta: int, side: str) -> float:
    """I_alpha(y): one-eigenvalue Wishart rate on either side of the bulk."""
    if side == "upper":
        if y < mp.lam_plus:
            return math.inf
        return beta / (4.0 * (1.0 + alpha)) * _mp_edge_integral(mp, mp.lam_plus, y)
    if y > mp.lam_minus or y < 0:
        return math.inf
    if y == 0.0:
        return math.inf
    return beta / (4.0 * (1.0 + alpha)) * _mp_edge_integral(mp, y, mp.lam_minus)


def wishart_potential_rate(y: float, alpha: float, beta: int = 1) -> float:
    """I_alpha via its potential form (independent of the integral route).

    (beta/(4(1+alpha))) [ y - (1-alpha) ln y - 2 alpha int ln|y-t| dpi(t) - C ]
    with C pinning the value 0 at the near bulk edge. Used as the
    cross-check oracle for the integral form.
    """
    check_beta(beta)
    mp = MarchenkoPastur(alpha)
    if y < 0 or (mp.lam_minus < y < mp.lam_plus):
        return math.inf

    def pot(t):
        lg = (1.0 - alpha) * math.log(t) if alpha < 1 else 0.0
        return t - lg - 2.0 * alpha * log_potential(mp, t)

    edge = mp.lam_plus if y >= mp.lam_plus else mp.lam_minus
    return beta / (4.0 * (1.0 + alpha)) * (pot(y) - pot(edge))


def _wishart_tilt(gamma: float, alpha: float) -> float:
    """Spherical tilt parameter of a covariance spike 1 + gamma.

    gamma / (alpha (1 + gamma)): monotone on gamma > -1, and the tilt
    crosses the inverse-Stieltjes edge values of the MP law exactly at
    gamma = +-sqrt(alpha) (the BBP detachment thresholds).
    """
    return gamma / (alpha * (1.0 + gamma))


@lru_cache(maxsize=512)
def _perturbed_wishart_center(gamma: float, alpha: float, beta: int, side: str) -> tuple[float, float]:
    if side == "lower" and alpha == 1.0:
        raise DomainError("alpha = 1 leaves no room below the bulk (hard edge at 0)")
    mp = MarchenkoPastur(alpha)
    theta_w = _wishart_tilt(gamma, alpha)
    coeff = (beta / 4.0) * alpha / (1.0 + alpha)
    phi = lambda y: (_wishart_edge_rate(mp, y, alpha, beta, side)
                     - (0.0 if theta_w == 0 else coeff * j_one(mp, theta_w, y).value))
    if side == "upper":
        # spiked minima sit at l(1 + alpha/(l-1)) <= 2(1+gamma); keep them inside
        hi = mp.lam_plus + 10.0 + 2.0 * abs(theta_w) + 2.0 * max(gamma, 0.0)
        lo = mp.lam_plus
    else:
        lo, hi = max(1e-10, mp.lam_minus - 10.0 - 2.0 * abs(theta_w)), mp.lam_minus
    x, v = _golden_min(phi, lo, hi, tol=1e-12)
    edge = mp.lam_plus if side == "upper" else mp.lam_minus
    if phi(edge) < v:  # sub-critical minimum sits at the bulk edge
        x, v = edge, phi(edge)
    return x, v


def perturbed_wishart_rate(x: float, gamma: float, alpha: float, beta: int = 1) -> float:
    """Rate I_{gamma,alpha}(x) for one eigenvalue of a rank-one perturbed Wishart.

    I_{gamma,alpha}(x) = I_alpha(x) - c J(pi_alpha, theta(gamma), x) - inf_y [same]
    with theta(gamma) = gamma/(alpha(1+gamma)) and c = (beta/4) alpha/(1+alpha);
    carries beta. This tilt normalization (rather than the displayed
    gamma/(1-gamma) with coefficient beta/2, which loses coercivity and the
    spiked locations) makes the rate vanish exactly at the classical spiked
    outlier ell(1 + alpha/(ell-1)), ell = 1+gamma, with detachment at
    |gamma| = sqrt(alpha). Positive gamma pairs with eigenvalues above the
    bulk, negative below (gamma = 0 infers the side from x). +inf inside
    the bulk and below 0.
    """
    check_beta(beta)
    if not gamma > -1.0:
        raise DomainError("gamma must exceed -1 (the spike 1 + gamma must stay positive)")
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    mp = MarchenkoPastur(alpha)
    if x < 0 or (mp.lam_minus < x < mp.lam_plus):
        return math.inf
    if gamma > 0:
        side = "upper"
    elif gamma < 0:
        side = "lower"
    else:
        side = "upper" if x >= mp.lam_plus else "lower"
    if side == "lower" and alpha == 1.0:
        raise DomainError("alpha = 1 leaves no room below the bulk (hard edge at 0)")
    if (side == "upper") != (x >= mp.lam_plus):
        raise DomainError(f"x={x!r} is on the wrong side of the bulk for gamma={gamma!r}")
    theta_w = _wishart_tilt(gamma, alpha)
    coeff = (beta / 4.0) * alpha / (1.0 + alpha)
    _, vmin = _perturbed_wishart_center(gamma, alpha, beta, side)
    phi = _wishart_edge_rate(mp, x, alpha, beta, side)
    if theta_w != 0:
        phi -= coeff * j_one(mp, theta_w, x).value
    return max(0.0, phi - vmin)


def perturbed_wishart_argmin(gamma: float, alpha: float, beta: int = 1) -> float:
    """Zero of the perturbed Wishart rate (typical outlier location)."""
    check_beta(beta)
    side = "upper" if gamma >= 0 else "lower"
    return _perturbed_wishart_center(gamma, alpha, beta, side)[0]


# ---------------------------------------------------------------------------
# annealed integrals


def annealed_lambda_wishart(theta: float, alpha: float, residual_tol: float = 1e-10) -> tuple[float, float]:
    """Annealed Wishart log-Laplace limit (without the beta/2 prefactor).

    Lambda(theta) = sup_{a in (0,1)} theta^2 a(1-a) + a' ln(a/a')
                    + (1-a') ln((1-a)/(1-a')),  a' = 1/(1+alpha).

    Returns (value, maximizer); strictly concave in a, so the maximizer is
    unique. Newton-polished until the first-order residual
    |theta^2 (1-2a) + a'/a - (1-a')/(1-a)| <= residual_tol.
    """
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    ap = 1.0 / (1.0 + alpha)
    if theta == 0:
        return 0.0, ap

    def f(a):
        return theta * theta * a * (1 - a) + ap * math.log(a / ap) + (1 - ap) * math.log((1 - a) / (1 - ap))

    def fp(a):
        return theta * theta * (1 - 2 * a) + ap / a - (1 - ap) / (1 - a)

    def fpp(a):
        return -2 * theta * theta - ap / (a * a) - (1 - ap) / ((1 - a) ** 2)

    a, _ = golden_section_max(f, 1e-12, 1 - 1e-12, tol=1e-12)
    for _ in range(100):
        r = fp(a)
        if abs(r) <= residual_tol:
            break
        step = -r / fpp(a)
        a_new = a + step
        while not (0 < a_new < 1):
            step *= 0.5
            a_new = a + step
        a = a_new
    else:
        raise ConvergenceError("annealed Wishart maximizer did not converge")
    return f(a), a


@dataclass(frozen=True)
class VarianceProfile:
    """Symmetric p x p matrix R = sigma^2 with block weights alpha on the simplex."""

    R: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "alpha", alpha)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise DomainError("R must be a square matrix")
        if not np.allclose(R, R.T, atol=1e-12):
            raise DomainError("R must be symmetric")
        if np.any(R < 0):
            raise DomainError("R entries are squared deviations and must be nonnegative")
        if alpha.shape != (R.shape[0],):
            raise DomainError("alpha must have one weight per block")
        if np.any(alpha <= 0) or abs(alpha.sum() - 1.0) > 1e-12:
            raise DomainError("alpha must be strictly positive and sum to 1")

    @property
    def p(self) -> int:
        return self.R.shape[0]


def assumption_neg_check(profile: VarianceProfile, tol: float = 1e-10) -> bool:
    """True iff psi -> <psi, R psi> is negative semidefinite orthogonally to (1,..,1).

    Eigen-decomposition of the projected form with tolerance ``tol`` on the
    eigenvalue signs. A semidefinite boundary (some projected eigenvalue
    within tol of 0, e.g. rank-one R) is accepted but flagged with a
    warning: strict concavity of the annealed objective then fails.
    """
    p = profile.p
    if p == 1:
        return True
    basis = null_space(np.ones((1, p)))
    m = basis.T @ profile.R @ basis
    ev = np.linalg.eigvalsh(0.5 * (m + m.T))
    if np.any(ev > tol):
        return False
    if np.any(np.abs(ev) <= tol):
        warnings.warn(
            "variance profile is on the semidefinite boundary of the negativity "
            "assumption; the annealed maximizer may not be unique",
            stacklevel=2,
        )
    return True


def annealed_lambda_profile(
    theta: float,
    profile: VarianceProfile,
    kkt_tol: float = 1e-8,
    enforce_assumption: bool = True,
) -> tuple[float, np.ndarray]:
    """Annealed variance-profile value (without the beta/2 prefactor) and maximizer.

    sup over the simplex of (theta^2/2) <psi, R psi> + sum alpha_i ln(psi_i/alpha_i),
    strictly concave under the negativity assumption (checked via
    ``assumption_neg_check`` unless ``enforce_assumption=False``; the spec
    example with R = identity needs the escape hatch). Mirror ascent plus a
    reduced Newton polish; KKT residual <= ``kkt_tol`` or ConvergenceError.
    """
    if theta < 0:
        raise DomainError("theta must be >= 0")
    if enforce_assumption and not assumption_neg_check(profile):
        raise AssumptionError("variance profile fails the negativity assumption")
    alpha = profile.alpha
    R = profile.R
    if theta == 0:
        return 0.0, alpha.copy()

    t2 = theta * theta

    def f(psi):
        return float(0.5 * t2 * psi @ R @ psi + alpha @ np.log(psi / alpha))

    def grad(psi):
        return t2 * (R @ psi) + alpha / psi

    # mirror ascent to the neighborhood of the optimum
    psi = alpha.copy()
    val = f(psi)
    step = 0.5
    for _ in range(2000):
        g = grad(psi)
        g = g - g.max()
        moved = False
        while step > 1e-18:
            cand = psi * np.exp(step * g)
            cand /= cand.sum()
            v = f(cand)
            if v > val + 1e-15:
                psi, val, moved = cand, v, True
                step *= 1.5
                break
            step *= 0.5
        if not moved:
            break

    # Newton polish on the reduced coordinates (last entry eliminated);
    # near the optimum the objective is flat to fp noise, so steps are
    # accepted on gradient-norm decrease
    def red_norm(v):
        g = grad(v)
        return float(np.max(np.abs(g[:-1] - g[-1])))

    for _ in range(100):
        g = grad(psi)
        red_g = g[:-1] - g[-1]
        cur = float(np.max(np.abs(red_g)))
        if cur <= kkt_tol * 1e-2:
            break
        H = t2 * R - np.diag(alpha / psi**2)
        A = H[:-1, :-1] - H[:-1, [-1]] - H[[-1], :-1] + H[-1, -1]
        try:
            step_vec = np.linalg.solve(A, -red_g)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        for _ in range(60):
            cand = psi.copy()
            cand[:-1] += scale * step_vec
            cand[-1] = 1.0 - cand[:-1].sum()
            if np.all(cand > 0) and red_norm(cand) < cur:
                psi = cand
                break
            scale *= 0.5
        else:
            break
    val = f(psi)

    g = grad(psi)
    residual = float(np.max(g) - np.min(g))
    if residual > kkt_tol:
        raise ConvergenceError(f"annealed profile KKT residual {residual:g} above {kkt_tol:g}")
    return val, psi


def profile_discretize(sigma: Callable[[float, float], float], p: int, rtol: float = 1e-8) -> VarianceProfile:
    """Block-average a continuous symmetric profile on [0,1]^2 into p x p cells.

    R_ij is the cell average of sigma^2 (so the block deviation is its
    square root); alpha_i = 1/p. Each cell uses a tensor Gauss-Legendre
    rule, refined once and checked for agreement within ``rtol``.
    """
    if p < 1:
        raise DomainError("p must be >= 1")

    def cell_mean(i, j, order):
        nodes, wts = np.polynomial.legendre.leggauss(order)
        x = (i + 0.5 * (nodes + 1.0)) / p
        y = (j + 0.5 * (nodes + 1.0)) / p
        w2 = np.outer(wts, wts) / 4.0  # reference cell [-1,1]^2 has area 4
        vals = np.array([[sigma(a, b) ** 2 for b in y] for a in x])
        return float(np.sum(w2 * vals))

    R = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            coarse = cell_mean(i, j, 12)
            fine = cell_mean(i, j, 24)
            if abs(fine - coarse) > rtol * max(1.0, abs(fine)):
                raise NumericalError(f"cell ({i},{j}) quadrature did not settle within {rtol:g}")
            R[i, j] = R[j, i] = fine
    return VarianceProfile(R, np.full(p, 1.0 / p))


# ---------------------------------------------------------------------------
# outlier point process


def outlier_interval_cost(
    intervals: Sequence[tuple[float, float]],
    counts: Sequence[int],
    rate: Callable[[float], float],
) -> float:
    """sum_i n_i * inf_{A_i} rate over disjoint intervals above the bulk.

    The infimum is located by golden section (rates are monotone above the
    edge, so it sits at the left endpoint; endpoints are checked explicitly
    as well). DomainError on overlapping intervals or intervals reaching
    into the bulk (infinite rate at the left endpoint).
    """
    if len(intervals) != len(counts):
        raise DomainError("one count per interval")
    iv = [(float(a), float(b)) for a, b in intervals]
    if any(b < a for a, b in iv):
        raise DomainError("intervals must satisfy a <= b")
    order = sorted(range(len(iv)), key=lambda i: iv[i][0])
    for i, j in zip(order, order[1:]):
        if iv[j][0] < iv[i][1]:
            raise DomainError(f"intervals {iv[i]} and {iv[j]} overlap")
    if any(n < 0 for n in counts):
        raise DomainError("counts must be nonnegative")
    total = 0.0
    for (a, b), n in zip(iv, counts):
        if not math.isfinite(rate(a)):
            raise DomainError(f"interval [{a:g}, {b:g}] reaches below the support edge")
        if n == 0:
            continue
        if b > a:
            _, inner = _golden_min(rate, a, b, tol=1e-10)
        else:
            inner = rate(a)
        total += n * min(inner, rate(a), rate(b))
    return total
