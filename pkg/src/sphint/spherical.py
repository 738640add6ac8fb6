"""Limiting spherical integrals and their first-principles oracles.

The central object is the scalar limit

    J(mu, theta, lambda) = K(mu, theta, lambda, v*)
    K = theta*lambda + (v - lambda) G(v) - ln|theta| - int ln|v - x| dmu(x) - 1

with v* = lambda when the tilt binds (G(lambda) <= theta for theta > 0) and
v* = G^{-1}(theta) otherwise; theta = 0 gives exactly 0. The k-dimensional
limit is the sum of scalar terms over (theta_i, lambda_i) pairs. Values are
in the tilt normalization: the N -> infinity limit of the normalized
log-Laplace transform equals (beta/2) times these numbers, and callers
apply the beta/2 themselves.

Two oracles recompute J from first principles for discrete models: a
simplex-constrained concave maximization of

    theta * sum eta_i gamma_i + sum_bulk alpha_i ln(gamma_i / alpha_i)

and a 2-d conditional optimization whose objective couples a 1-d spherical
integral evaluated at an interlacing root with the simplex terms.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import ConvergenceError, DomainError, ShapeError
from .measures import (
    DiscreteAtoms,
    SpectralMeasure,
    log_potential,
    stieltjes,
    stieltjes_edge_limit,
    stieltjes_inverse,
    support_edges,
)

__all__ = [
    "DiscreteModel",
    "ThetaSpec",
    "OutlierSpec",
    "Regime",
    "JBreakdown",
    "v_star",
    "j_one",
    "j_multi",
    "simplex_oracle_1d",
    "interlacing_roots",
    "conditional_oracle_2d",
    "transport_identity_check",
]


class Regime(enum.Enum):
    TILT_BINDS = "TiltBinds"
    INVERSE_BINDS = "InverseBinds"
    ZERO_TILT = "ZeroTilt"


@dataclass(frozen=True)
class JBreakdown:
    value: float
    v_star: float
    regime: Regime


@dataclass(frozen=True)
class ThetaSpec:
    """Ordered tilts: top theta_1 >= ... >= theta_k >= 0,
    bottom stored as [theta_{-l}, ..., theta_{-1}] with 0 >= theta_{-l} >= ... >= theta_{-1}.
    """

    top: tuple[float, ...] = ()
    bottom: tuple[float, ...] = ()

    def __post_init__(self):
        top = tuple(float(t) for t in self.top)
        bottom = tuple(float(t) for t in self.bottom)
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "bottom", bottom)
        if any(not math.isfinite(t) for t in top + bottom):
            raise DomainError("tilts must be finite")
        if any(t < 0 for t in top) or any(np.diff(top) > 0):
            raise DomainError("top tilts must be nonincreasing and >= 0")
        if any(t > 0 for t in bottom) or any(np.diff(bottom) > 0):
            raise DomainError("bottom tilts must be nonincreasing and <= 0")

    @property
    def all(self) -> tuple[float, ...]:
        return self.top + self.bottom


@dataclass(frozen=True)
class OutlierSpec:
    """Ordered outlier locations: top lambda_1 >= ... >= lambda_k,
    bottom stored ascending [lambda_{-1}, ..., lambda_{-l}] (smallest first).
    """

    top: tuple[float, ...] = ()
    bottom: tuple[float, ...] = ()

    def __post_init__(self):
        top = tuple(float(x) for x in self.top)
        bottom = tuple(float(x) for x in self.bottom)
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "bottom", bottom)
        if any(np.diff(top) > 0):
            raise DomainError("top outliers must be nonincreasing")
        if any(np.diff(bottom) < 0):
            raise DomainError("bottom outliers must be nondecreasing (smallest first)")


@dataclass(frozen=True)
class DiscreteModel:
    """Finitely many distinct eigenvalues eta with multiplicities.

    ``bulk`` is the (inclusive) index range of bulk etas; outliers sit
    strictly outside it on both sides and carry limit weight 0. Limit
    weights alpha_i = N_i / N_bulk on the bulk.
    """

    etas: tuple[float, ...]
    multiplicities: tuple[int, ...]
    bulk: tuple[int, int]

    def __post_init__(self):
        etas = tuple(float(x) for x in self.etas)
        mult = tuple(int(n) for n in self.multiplicities)
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "multiplicities", mult)
        if len(etas) != len(mult):
            raise ShapeError("etas and multiplicities must have equal length")
        if any(np.diff(etas) <= 0):
            raise DomainError("etas must be strictly increasing")
        if any(n <= 0 for n in mult):
            raise DomainError("multiplicities must be positive")
        i0, i1 = self.bulk
        if not (0 <= i0 <= i1 < len(etas)):
            raise DomainError("bulk index range out of bounds")

    @property
    def n_total(self) -> int:
        return sum(self.multiplicities)

    @property
    def bulk_slice(self) -> slice:
        return slice(self.bulk[0], self.bulk[1] + 1)

    @property
    def alphas(self) -> np.ndarray:
        """Limit weights over all etas: bulk multiplicity fractions, 0 on outliers."""
        a = np.zeros(len(self.etas))
        m = np.asarray(self.multiplicities, dtype=float)
        nb = m[self.bulk_slice].sum()
        a[self.bulk_slice] = m[self.bulk_slice] / nb
        return a

    def bulk_measure(self) -> DiscreteAtoms:
        a = self.alphas
        s = self.bulk_slice
        return DiscreteAtoms(list(zip(self.etas[s], a[s])))

    def outliers(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(top outliers descending, bottom outliers ascending)."""
        i0, i1 = self.bulk
        top = tuple(reversed(self.etas[i1 + 1 :]))
        bottom = tuple(self.etas[:i0])
        return top, bottom

    def to_json_dict(self) -> dict:
        return {"etas": list(self.etas), "mult": list(self.multiplicities), "bulk": list(self.bulk)}

    @classmethod
    def from_json(cls, obj) -> "DiscreteModel":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(obj["etas"]), tuple(obj["mult"]), tuple(obj["bulk"]))


# ---------------------------------------------------------------------------
# closed-form route


def _check_tilt_side(mu: SpectralMeasure, theta: float, lam: float) -> None:
    e = support_edges(mu)
    if theta > 0 and lam < e.right:
        raise DomainError(f"theta > 0 requires lambda >= r_mu = {e.right!r}, got {lam!r}")
    if theta < 0 and lam > e.left:
        raise DomainError(f"theta < 0 requires lambda <= l_mu = {e.left!r}, got {lam!r}")


def _g_or_edge_limit(mu: SpectralMeasure, lam: float) -> float:
    """G(lam) off-support, or the one-sided edge limit when lam sits on an edge."""
    e = support_edges(mu)
    if lam == e.right:
        return stieltjes_edge_limit(mu, "right")
    if lam == e.left:
        return stieltjes_edge_limit(mu, "left")
    return stieltjes(mu, lam)


def v_star(mu: SpectralMeasure, theta: float, lam: float) -> float:
    """The binding point v of the scalar spherical integral.

    theta > 0: lambda itself when G(lambda) <= theta, else G^{-1}(theta);
    theta < 0 mirrors the comparison. At lambda = r_mu with diverging edge
    limit the inverse branch applies.
    """
    if theta == 0:
        raise DomainError("theta = 0 has no binding point")
    _check_tilt_side(mu, theta, lam)
    g = _g_or_edge_limit(mu, lam)
    if theta > 0:
        return lam if g <= theta else stieltjes_inverse(mu, theta)
    return lam if g >= theta else stieltjes_inverse(mu, theta)


def j_one(mu: SpectralMeasure, theta: float, lam: float) -> JBreakdown:
    """Scalar limiting spherical integral J(mu, theta, lambda).

    Tilt normalization: the N -> infinity limit of the log-Laplace
    transform is (beta/2) * J; the beta/2 is applied by callers. theta = 0
    returns exactly 0 (the integrand degenerates to 1), bypassing the
    K-formula whose -ln|theta| diverges.
    """
    if theta == 0:
        return JBreakdown(0.0, math.nan, Regime.ZERO_TILT)
    _check_tilt_side(mu, theta, lam)
    g = _g_or_edge_limit(mu, lam)
    binds = (g <= theta) if theta > 0 else (g >= theta)
    if binds:
        val = theta * lam - math.log(abs(theta)) - log_potential(mu, lam) - 1.0
        return JBreakdown(float(val), float(lam), Regime.TILT_BINDS)
    v = stieltjes_inverse(mu, theta)
    # K with G(v) = theta exactly: theta*lam + (v-lam)*theta = theta*v
    val = theta * v - math.log(abs(theta)) - log_potential(mu, v) - 1.0
    return JBreakdown(float(val), float(v), Regime.INVERSE_BINDS)


def j_multi(mu: SpectralMeasure, thetas: ThetaSpec, lambdas: OutlierSpec) -> float:
    """Sum of scalar spherical integrals over all (theta_i, lambda_i) pairs.

    Pairing follows the index conventions: top tilts pair with top outliers
    in decreasing order; the most negative bottom tilt theta_{-1} pairs with
    the smallest outlier lambda_{-1}.
    """
    if len(thetas.top) != len(lambdas.top):
        raise ShapeError(f"{len(thetas.top)} top tilts vs {len(lambdas.top)} top outliers")
    if len(thetas.bottom) != len(lambdas.bottom):
        raise ShapeError(f"{len(thetas.bottom)} bottom tilts vs {len(lambdas.bottom)} bottom outliers")
    total = 0.0
    for th, lam in zip(thetas.top, lambdas.top):
        total += j_one(mu, th, lam).value
    # thetas.bottom is [theta_{-l}..theta_{-1}], lambdas.bottom is [lambda_{-1}..lambda_{-l}]
    for th, lam in zip(thetas.bottom, reversed(lambdas.bottom)):
        total += j_one(mu, th, lam).value
    return total


# ---------------------------------------------------------------------------
# oracle 1: simplex maximization (discrete models)


def _simplex_objective(model: DiscreteModel, theta: float, gamma: np.ndarray) -> float:
    etas = np.asarray(model.etas)
    a = model.alphas
    s = model.bulk_slice
    gb = gamma[s]
    if np.any(gb <= 0):
        return -math.inf
    return float(theta * np.dot(etas, gamma) + np.dot(a[s], np.log(gb / a[s])))


def _simplex_gradient(model: DiscreteModel, theta: float, gamma: np.ndarray) -> np.ndarray:
    etas = np.asarray(model.etas)
    g = theta * etas.copy()
    a = model.alphas
    s = model.bulk_slice
    g[s] += a[s] / gamma[s]
    return g


def _warm_start(model: DiscreteModel, theta: float) -> np.ndarray:
    """Closed-form critical point: masses alpha_i/(theta (v - eta_i)) with
    v the top eta when feasible, else v = G^{-1}(theta) on the bulk measure."""
    etas = np.asarray(model.etas)
    a = model.alphas
    s = model.bulk_slice
    mu = model.bulk_measure()
    top = etas[-1]
    gamma = np.zeros_like(etas)
    g_top = _g_or_edge_limit(mu, top) if top > etas[s][-1] else stieltjes_edge_limit(mu, "right")
    if g_top <= theta:  # tilt binds: leftover mass on the top coordinate
        gamma[s] = a[s] / (theta * (top - etas[s]))
        gamma[-1] = 1.0 - gamma[s].sum()
    else:
        v = stieltjes_inverse(mu, theta)
        gamma[s] = a[s] / (theta * (v - etas[s]))
    gamma = np.clip(gamma, 0.0, None)
    gamma /= gamma.sum()
    return gamma


def _mirror_ascent(objective, gradient, gamma0, max_iter=500, step0=0.5, tol=1e-14):
    """Multiplicative-weights ascent on the simplex with backtracking."""
    gamma = gamma0 / gamma0.sum()
    best = objective(gamma)
    step = step0
    for _ in range(max_iter):
        grad = gradient(gamma)
        grad = grad - grad.max()
        improved = False
        while step > 1e-18:
            cand = gamma * np.exp(step * grad)
            cand /= cand.sum()
            val = objective(cand)
            if val > best + tol:
                gamma, best, improved = cand, val, True
                step *= 1.6
                break
            step *= 0.5
        if not improved:
            break
    return gamma, best


def _kkt_residual(gradient, gamma, active_tol=1e-12):
    g = gradient(gamma)
    active = gamma > active_tol
    if not np.any(active):
        return math.inf
    # multiplier estimate: mass-weighted mean of the active gradient
    nu = float(np.dot(gamma[active], g[active]) / gamma[active].sum())
    res = float(np.max(np.abs(g[active] - nu)))
    if np.any(~active):
        res = max(res, float(max(0.0, np.max(g[~active]) - nu)))
    return res


def simplex_oracle_1d(model: DiscreteModel, theta: float, kkt_tol: float = 1e-10) -> float:
    """sup over the simplex of theta<eta,gamma> + sum_bulk alpha ln(gamma/alpha).

    Projected concave maximization (multiplicative mirror ascent) warm-started
    at the closed-form critical point; a cold alpha-centered start is run as
    well and the best value returned. Raises ConvergenceError when the KKT
    residual stays above ``kkt_tol``.
    """
    if theta < 0:
        raise DomainError("theta must be >= 0; mirror by negating etas for theta < 0")
    if theta == 0:
        return 0.0
    objective = lambda g: _simplex_objective(model, theta, g)
    gradient = lambda g: _simplex_gradient(model, theta, g)

    n = len(model.etas)
    cold = model.alphas * 0.9 + 0.1 / n
    cold /= cold.sum()
    warm = _warm_start(model, theta)
    best_gamma, best_val = None, -math.inf
    for start in (warm, cold):
        gamma, val = _mirror_ascent(objective, gradient, start)
        if val > best_val:
            best_gamma, best_val = gamma, val
    # the analytic warm start is itself a KKT point; certify with whichever
    # iterate has the smaller residual (values agree to fp precision)
    res = min(_kkt_residual(gradient, best_gamma), _kkt_residual(gradient, warm))
    if res > kkt_tol:
        raise ConvergenceError(f"simplex oracle KKT residual {res:g} above {kkt_tol:g}")
    return best_val


# ---------------------------------------------------------------------------
# oracle 2: interlacing roots and the 2-d conditional problem


def _secular(etas: np.ndarray, gamma: np.ndarray, chi: float) -> float:
    # terms with gamma_i = 0 are dropped so endpoint evaluations stay finite
    nz = gamma > 0
    return float(np.sum(gamma[nz] / (chi - etas[nz])))


def interlacing_roots(model: DiscreteModel, gamma: Sequence[float]) -> list[float]:
    """One root of sum gamma_i/(chi - eta_i) = 0 per consecutive eta gap.

    The rational function decreases strictly across each gap, so bisection
    between (nudged) endpoints converges; roots to 1e-12 absolute. When an
    endpoint weight vanishes and the function does not change sign in the
    gap, the matching endpoint is returned (right endpoint for a positive
    function, left for negative).
    """
    etas = np.asarray(model.etas, dtype=float)
    gam = np.asarray(gamma, dtype=float)
    if gam.shape != etas.shape:
        raise ShapeError("gamma must have one entry per eta")
    if np.any(gam < 0) or abs(gam.sum() - 1.0) > 1e-9:
        raise DomainError("gamma must lie on the simplex")
    roots = []
    for j in range(len(etas) - 1):
        a, b = etas[j], etas[j + 1]
        width = b - a
        # nudge inward past any active pole until the sign is as expected
        fa = fb = None
        da = db = width * 1e-13
        for _ in range(200):
            fa = _secular(etas, gam, a + da)
            if gam[j] == 0 or fa > 0:
                break
            da *= 0.5
        for _ in range(200):
            fb = _secular(etas, gam, b - db)
            if gam[j + 1] == 0 or fb < 0:
                break
            db *= 0.5
        if fa <= 0 and fb <= 0:
            roots.append(float(a))  # function negative on the gap
            continue
        if fa >= 0 and fb >= 0:
            roots.append(float(b))  # function positive on the gap
            continue
        root = brentq(lambda c: _secular(etas, gam, c), a + da, b - db, xtol=1e-13, maxiter=300)
        roots.append(float(root))
    return roots


def _top_gap_root(etas: np.ndarray, gamma: np.ndarray) -> float:
    """Root of the secular function in the top gap (eta_{n-2}, eta_{n-1})."""
    a, b = etas[-2], etas[-1]
    width = b - a
    lo, hi = a + width * 1e-13, b - width * 1e-13
    if _secular(etas, gamma, lo) <= 0:
        return float(a)
    if _secular(etas, gamma, hi) >= 0:
        return float(b)
    return float(brentq(lambda c: _secular(etas, gamma, c), lo, hi, xtol=1e-13, maxiter=300))


def conditional_oracle_2d(
    model: DiscreteModel,
    theta1: float,
    theta2: float,
    n_starts: int = 8,
    seed: int = 12345,
    f_tol: float = 1e-6,
) -> float:
    """Recompute J(mu,theta1,lam1) + J(mu,theta2,lam2) by the conditional route.

    Maximizes J(mu, theta2, chi(gamma)) + sum_bulk alpha ln(gamma/alpha)
    + theta1 <eta, gamma> over the simplex, where chi(gamma) is the top
    interlacing root (pinned at the top eta when its multiplicity is >= 2).
    Multi-start Nelder-Mead under a softmax reparameterization; the start
    list is fixed by ``seed`` and the best value is returned.
    """
    if not (theta1 >= theta2 >= 0):
        raise DomainError("need theta1 >= theta2 >= 0")
    i0, i1 = model.bulk
    n_top = len(model.etas) - 1 - i1
    top_mult = model.multiplicities[-1]
    if n_top < 2 and not (n_top >= 1 and top_mult >= 2):
        raise DomainError("need >= 2 top outliers, or a top outlier of multiplicity >= 2")
    if theta1 == 0:
        return 0.0

    etas = np.asarray(model.etas)
    a = model.alphas
    s = model.bulk_slice
    mu = model.bulk_measure()
    chi_fixed = etas[-1] if (top_mult >= 2) else None

    def objective(gamma: np.ndarray) -> float:
        chi = chi_fixed if chi_fixed is not None else _top_gap_root(etas, gamma)
        val = j_one(mu, theta2, chi).value if theta2 > 0 else 0.0
        gb = gamma[s]
        with np.errstate(divide="ignore"):
            ent = np.dot(a[s], np.log(gb / a[s]))
        return val + float(ent) + theta1 * float(np.dot(etas, gamma))

    n = len(etas)

    def from_logits(u: np.ndarray) -> np.ndarray:
        z = np.concatenate([u, [0.0]])
        z = z - z.max()
        w = np.exp(z)
        return w / w.sum()

    neg = lambda u: -objective(from_logits(u))

    rng = np.random.default_rng(seed)
    starts = [model.alphas * 0.9 + 0.1 / n]
    starts += [rng.dirichlet(np.ones(n)) for _ in range(n_starts - 1)]

    best = -math.inf
    ok = False
    for g0 in starts:
        g0 = np.clip(g0, 1e-12, None)
        g0 /= g0.sum()
        u0 = np.log(g0[:-1]) - np.log(g0[-1])
        res = minimize(
            neg,
            u0,
            method="Nelder-Mead",
            options={"maxfev": 12000, "fatol": f_tol * 1e-3, "xatol": 1e-9},
        )
        if res.fun is not None and -res.fun > best:
            best = -res.fun
            ok = ok or res.success
    if not ok and best == -math.inf:
        raise ConvergenceError("conditional 2-d oracle: all starts failed")
    return best


def transport_identity_check(
    mu: SpectralMeasure, theta: float, lam_low: float, lam_high: float
) -> float:
    """Residual of the outlier-transport identity for discrete measures.

    |J(theta, lam_high) - J(theta, lam_low)
     - sum alpha_i ln(|eta_i - lam_low| / |eta_i - lam_high|)
     - theta (lam_high - lam_low)|,

    valid when both evaluations are in the tilt-binding regime; contract
    residual <= 1e-10.
    """
    if not isinstance(mu, DiscreteAtoms):
        raise DomainError("transport identity requires a discrete measure")
    e = support_edges(mu)
    if not (e.right <= lam_low <= lam_high):
        raise DomainError("need r_mu <= lam_low <= lam_high")
    lo = j_one(mu, theta, lam_low)
    hi = j_one(mu, theta, lam_high)
    if lo.regime is not Regime.TILT_BINDS or hi.regime is not Regime.TILT_BINDS:
        raise DomainError("transport identity requires the tilt-binding regime at both points")
    corr = float(np.sum(mu.weights * (np.log(np.abs(mu.positions - lam_low)) - np.log(np.abs(mu.positions - lam_high)))))
    return abs(hi.value - lo.value - corr - theta * (lam_high - lam_low))
