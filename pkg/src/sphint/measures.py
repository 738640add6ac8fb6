"""Compactly supported spectral measures and their transforms.

Measures come in four flavours: discrete atoms, the semicircle law, the
Marchenko-Pastur law of parameter ``alpha`` in (0, 1], and a tabulated
density on a uniform grid. All carry a Cauchy-Stieltjes transform

    G(z) = int (z - x)^{-1} dmu(x),   z outside the support,

its inverse on either side of the support, the log-potential
``int ln|v - x| dmu(x)``, support edges, and an epsilon-discretization
into atoms.

Semicircle and Marchenko-Pastur use closed forms for G and the
log-potential; both are cross-checked against adaptive quadrature in the
test suite. Generic integrals against the two named densities go through
a trigonometric substitution that removes the square-root edge
singularities, then a cached Gauss-Legendre rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, NumericalError

__all__ = [
    "SpectralMeasure",
    "DiscreteAtoms",
    "Semicircle",
    "MarchenkoPastur",
    "TabulatedDensity",
    "SupportEdges",
    "stieltjes",
    "stieltjes_edge_limit",
    "stieltjes_inverse",
    "log_potential",
    "support_edges",
    "discretize",
    "dilate",
    "reflect",
    "quantiles",
    "measure_to_json",
    "measure_from_json",
    "measure_from_spec",
]

_ATOL_WEIGHTS = 1e-12
_ATOL_DENSITY = 1e-8

# 200-point Gauss-Legendre rule on [0, pi/2], reused by every edge-substituted
# integral against a named density.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(200)
_GL_T = (np.pi / 2) * 0.5 * (_GL_NODES + 1.0)
_GL_W = (np.pi / 2) * 0.5 * _GL_WEIGHTS


def _quad_check(f, a, b, target_abs=1e-9, **kw) -> float:
    """scipy.quad with the library's convergence contract."""
    val, err = quad(f, a, b, limit=400, epsabs=1e-12, epsrel=1e-12, **kw)
    if err > target_abs:
        raise NumericalError(f"quadrature error {err:g} above {target_abs:g}")
    return val


@dataclass(frozen=True)
class SupportEdges:
    left: float
    right: float


class SpectralMeasure:
    """Base class; concrete measures implement the raw hooks below."""

    def _edges(self) -> SupportEdges:
        raise NotImplementedError

    def _stieltjes(self, z: float) -> float:
        raise NotImplementedError

    def _log_potential(self, v: float) -> float:
        raise NotImplementedError

    def _mass(self, a: float, b: float) -> float:
        """Measure of [a, b) intersected with the support."""
        raise NotImplementedError

    def _edge_limit(self, side: str) -> float:
        """lim of G at the support edge, possibly +-inf."""
        raise NotImplementedError

    def to_json_dict(self) -> dict:
        raise NotImplementedError


class DiscreteAtoms(SpectralMeasure):
    def __init__(self, atoms: Sequence[tuple[float, float]]):
        pos = np.asarray([a[0] for a in atoms], dtype=float)
        wts = np.asarray([a[1] for a in atoms], dtype=float)
        if pos.size == 0:
            raise DomainError("need at least one atom")
        if np.any(np.diff(pos) <= 0):
            raise DomainError("atom positions must be strictly increasing")
        if np.any(wts <= 0):
            raise DomainError("atom weights must be strictly positive")
        if abs(wts.sum() - 1.0) > _ATOL_WEIGHTS:
            raise DomainError(f"atom weights sum to {wts.sum()!r}, not 1")
        self.positions = pos
        self.weights = wts / wts.sum()

    def _edges(self):
        return SupportEdges(float(self.positions[0]), float(self.positions[-1]))

    def _stieltjes(self, z):
        with np.errstate(divide="ignore"):
            return float(np.sum(self.weights / (z - self.positions)))

    def _log_potential(self, v):
        d = np.abs(v - self.positions)
        if np.any(d == 0.0):
            return -math.inf
        return float(np.sum(self.weights * np.log(d)))

    def _mass(self, a, b):
        sel = (self.positions >= a) & (self.positions < b)
        return float(self.weights[sel].sum())

    def _edge_limit(self, side):
        return math.inf if side == "right" else -math.inf

    def to_json_dict(self):
        return {"type": "atoms", "atoms": [[float(x), float(w)] for x, w in zip(self.positions, self.weights)]}

    def __repr__(self):
        return f"DiscreteAtoms({len(self.positions)} atoms on [{self.positions[0]:g}, {self.positions[-1]:g}])"


class Semicircle(SpectralMeasure):
    """Standard semicircle law, density sqrt(4-x^2)/(2 pi) on [-2, 2]."""

    def _edges(self):
        return SupportEdges(-2.0, 2.0)

    @staticmethod
    def density(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 2, np.sqrt(np.maximum(4.0 - x * x, 0.0)) / (2 * np.pi), 0.0)

    @staticmethod
    def cdf(y: float) -> float:
        if y <= -2:
            return 0.0
        if y >= 2:
            return 1.0
        return 0.5 + (y * math.sqrt(4 - y * y) + 4 * math.asin(y / 2)) / (4 * math.pi)

    def _stieltjes(self, z):
        # rationalized form: no cancellation for |z| >> 2
        s = math.sqrt(z * z - 4.0)
        return 2.0 / (z + s) if z > 0 else 2.0 / (z - s)

    def _log_potential(self, v):
        a = abs(v)
        if a <= 2.0:
            return v * v / 4.0 - 0.5
        s = math.sqrt(v * v - 4.0)
        return v * v / 4.0 - a * s / 4.0 + math.log((a + s) / 2.0) - 0.5

    def _mass(self, a, b):
        return self.cdf(b) - self.cdf(a)

    def _edge_limit(self, side):
        return 1.0 if side == "right" else -1.0

    def to_json_dict(self):
        return {"type": "semicircle"}

    def __repr__(self):
        return "Semicircle()"


class MarchenkoPastur(SpectralMeasure):
    """Marchenko-Pastur law of ratio ``alpha`` in (0, 1].

    Density sqrt((l+ - x)(x - l-)) / (2 pi alpha x) on [l-, l+] with
    l+- = (1 +- sqrt(alpha))^2; the spectral limit of (1/M) G G* for an
    L x M Gaussian rectangle with L/M -> alpha.
    """

    def __init__(self, alpha: float):
        if not (0 < alpha <= 1):
            raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
        self.alpha = float(alpha)
        r = math.sqrt(self.alpha)
        self.lam_minus = (1 - r) ** 2
        self.lam_plus = (1 + r) ** 2

    def _edges(self):
        return SupportEdges(self.lam_minus, self.lam_plus)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lam_minus) & (x <= self.lam_plus) & (x > 0)
        num = np.sqrt(np.maximum((self.lam_plus - x) * (x - self.lam_minus), 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(inside, num / (2 * np.pi * self.alpha * np.where(x > 0, x, 1.0)), 0.0)
        return d

    def _integrate(self, h: Callable[[np.ndarray], np.ndarray]) -> float:
        # x(t) = l- + (l+ - l-) sin^2 t turns the sqrt edge factors into
        # smooth trigonometric ones; the remaining integrand is analytic
        # on [0, pi/2] (including alpha = 1, where x -> 0 at t = 0).
        span = self.lam_plus - self.lam_minus
        t = _GL_T
        st, ct = np.sin(t), np.cos(t)
        x = self.lam_minus + span * st * st
        w = span * span * 2.0 * (st * ct) ** 2 / (2 * np.pi * self.alpha)
        if self.lam_minus == 0.0:
            # alpha = 1: x = span sin^2 t, the 1/x pole cancels one sin^2.
            vals = w * h(x) / np.where(x > 0, x, 1.0)
            vals[x == 0.0] = 0.0
        else:
            vals = w * h(x) / x
        return float(np.sum(_GL_W * vals))

    def _stieltjes(self, z):
        # rationalized form 2/(z + a - 1 + s): stable as z -> +inf
        a = self.alpha
        s = math.copysign(1.0, z - (1 + a)) * math.sqrt((z - self.lam_minus) * (z - self.lam_plus))
        return 2.0 / (z + a - 1.0 + s)

    def _log_potential(self, v):
        if self.lam_minus < v < self.lam_plus:
            # interior log singularity: adaptive quadrature with explicit split
            return _quad_check(
                lambda x: math.log(abs(v - x)) * float(self.density(x)),
                self.lam_minus,
                self.lam_plus,
                points=[v],
            )
        return self._integrate(lambda x: np.log(np.abs(v - x)))

    def _mass(self, a, b):
        lo = max(a, self.lam_minus)
        hi = min(b, self.lam_plus)
        if hi <= lo:
            return 0.0
        span = self.lam_plus - self.lam_minus
        tlo = math.asin(min(1.0, math.sqrt(max((lo - self.lam_minus) / span, 0.0))))
        thi = math.asin(min(1.0, math.sqrt(max((hi - self.lam_minus) / span, 0.0))))
        t = tlo + (thi - tlo) * 0.5 * (_GL_NODES + 1.0)
        w = (thi - tlo) * 0.5 * _GL_WEIGHTS
        st, ct = np.sin(t), np.cos(t)
        x = self.lam_minus + span * st * st
        vals = span * span * 2.0 * (st * ct) ** 2 / (2 * np.pi * self.alpha)
        if self.lam_minus == 0.0:
            vals = np.where(x > 0, vals / np.where(x > 0, x, 1.0), 0.0)
        else:
            vals = vals / x
        return float(np.sum(w * vals))

    def _edge_limit(self, side):
        r = math.sqrt(self.alpha)
        if side == "right":
            return 1.0 / (self.alpha + r)
        if self.lam_minus == 0.0:
            return -math.inf
        return -1.0 / (r - self.alpha)

    def to_json_dict(self):
        return {"type": "mp", "alpha": self.alpha}

    def __repr__(self):
        return f"MarchenkoPastur(alpha={self.alpha:g})"


class TabulatedDensity(SpectralMeasure):
    """Density values on a uniform grid over [a, b], integrated by trapezoid.

    Grid resolution is the caller's responsibility; construction only checks
    nonnegativity and normalization (to 1e-8) by the trapezoid rule itself.
    """

    def __init__(self, support: tuple[float, float], values: Sequence[float]):
        a, b = float(support[0]), float(support[1])
        vals = np.asarray(values, dtype=float)
        if not (b > a):
            raise DomainError("support must satisfy a < b")
        if vals.ndim != 1 or vals.size < 2:
            raise DomainError("need at least two density values")
        if np.any(vals < 0):
            raise DomainError("density values must be nonnegative")
        grid = np.linspace(a, b, vals.size)
        total = float(np.trapezoid(vals, grid))
        if abs(total - 1.0) > _ATOL_DENSITY:
            raise DomainError(f"density integrates to {total!r}, not 1 (within 1e-8)")
        self.a, self.b = a, b
        self.grid = grid
        self.values = vals / total

    def _edges(self):
        return SupportEdges(self.a, self.b)

    def _stieltjes(self, z):
        return float(np.trapezoid(self.values / (z - self.grid), self.grid))

    def _log_potential(self, v):
        if v <= self.a or v >= self.b:
            return float(np.trapezoid(self.values * np.log(np.abs(v - self.grid)), self.grid))
        # v inside the support: integrate the log singularity analytically
        # over the two cells surrounding v, density frozen at f(v).
        h = self.grid[1] - self.grid[0]
        j = min(int((v - self.a) / h), self.values.size - 2)
        fv = float(np.interp(v, self.grid, self.values))
        lo, hi = self.grid[j], self.grid[j + 1]
        integrand = self.values * np.log(np.abs(np.where(np.abs(v - self.grid) > 0, v - self.grid, 1.0)))
        mask = np.ones_like(self.grid, dtype=bool)
        mask[j : j + 2] = False
        outer = float(np.trapezoid(np.where(mask, integrand, 0.0), self.grid))
        d1, d2 = v - lo, hi - v

        def cell(d):
            return d * (math.log(d) - 1.0) if d > 0 else 0.0

        return outer + fv * (cell(d1) + cell(d2))

    def _mass(self, a, b):
        lo, hi = max(a, self.a), min(b, self.b)
        if hi <= lo:
            return 0.0
        xs = np.linspace(lo, hi, 257)
        return float(np.trapezoid(np.interp(xs, self.grid, self.values), xs))

    def _edge_limit(self, side):
        edges = self._edges()
        edge = edges.right if side == "right" else edges.left
        z = edge + 1e-9 * max(1.0, abs(edge)) * (1 if side == "right" else -1)
        return self._stieltjes(z)

    def to_json_dict(self):
        return {"type": "density", "support": [self.a, self.b], "values": self.values.tolist()}

    def __repr__(self):
        return f"TabulatedDensity([{self.a:g}, {self.b:g}], {self.values.size} nodes)"


# ---------------------------------------------------------------------------
# operations


def support_edges(mu: SpectralMeasure) -> SupportEdges:
    """Support endpoints (l_mu, r_mu); closed forms for the named laws."""
    return mu._edges()


def stieltjes(mu: SpectralMeasure, z: float) -> float:
    """G(z) = int (z - x)^{-1} dmu(x) for z strictly outside the support.

    Raises DomainError for z inside the closed support: every formula in
    this library evaluates G off-support only, and the principal value is
    deliberately not offered.
    """
    e = mu._edges()
    if e.left <= z <= e.right:
        raise DomainError(f"z={z!r} lies inside the support [{e.left:g}, {e.right:g}]")
    return mu._stieltjes(float(z))


def stieltjes_edge_limit(mu: SpectralMeasure, side: str) -> float:
    """Limit of G at a support edge ('right' means z -> r_mu+). May be +-inf."""
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    return mu._edge_limit(side)


def stieltjes_inverse(mu: SpectralMeasure, theta: float, rtol: float = 1e-10) -> float:
    """The v off-support with G(v) = theta; support edge when theta overshoots.

    For theta > 0 the unique v > r_mu with G(v) = theta exists iff
    0 < theta < lim_{v->r_mu+} G(v); beyond that limit the tilt binds at the
    edge and r_mu is returned as the boundary sentinel (mirrored on the left
    for theta < 0). Bisection-refined until |G(v) - theta| <= rtol * |theta|.
    """
    if theta == 0:
        raise DomainError("theta = 0: the inverse Stieltjes transform diverges")
    e = mu._edges()
    if theta > 0:
        edge, sign = e.right, 1.0
    else:
        edge, sign = e.left, -1.0
    glim = mu._edge_limit("right" if theta > 0 else "left")
    if (theta > 0 and theta >= glim) or (theta < 0 and theta <= glim):
        return edge

    span = max(1.0, abs(edge))
    far = edge + sign * (1.0 / abs(theta) + 1.0)  # |G| < |theta| there
    near = edge + sign * span * 1e-8
    # walk toward the edge until G brackets theta
    for _ in range(200):
        if near == edge:
            return edge
        g = mu._stieltjes(near)
        if (theta > 0 and g >= theta) or (theta < 0 and g <= theta):
            break
        near = edge + (near - edge) / 16.0
    else:
        return edge

    f = lambda v: mu._stieltjes(v) - theta
    lo, hi = (near, far) if theta > 0 else (far, near)
    v = brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=300)
    if abs(mu._stieltjes(v) - theta) > rtol * abs(theta):
        raise NumericalError(f"inverse Stieltjes residual above tolerance at theta={theta!r}")
    return float(v)


def log_potential(mu: SpectralMeasure, v: float) -> float:
    """int ln|v - x| dmu(x); principal-value-safe when v touches the support."""
    return mu._log_potential(float(v))


def discretize(mu: SpectralMeasure, lo: float, epsilon: float) -> DiscreteAtoms:
    """Bin mu into atoms at lo + j*eps with weights mu([lo+j eps, lo+(j+1) eps)).

    Bins are half-open with the final bin closed, so boundary mass is
    assigned deterministically; empty bins are dropped and the weights are
    renormalized. Every support point moves by at most epsilon.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    e = mu._edges()
    if lo > e.left:
        raise DomainError(f"lo={lo!r} must not exceed the left support edge {e.left!r}")
    nbins = int(math.floor((e.right - lo) / epsilon)) + 1
    atoms = []
    for j in range(nbins):
        a = lo + j * epsilon
        b = lo + (j + 1) * epsilon
        if j == nbins - 1:
            b = max(b, e.right) + epsilon * 1e-9  # final bin closed
        w = mu._mass(a, b)
        if w > 0:
            atoms.append((a, w))
    total = sum(w for _, w in atoms)
    return DiscreteAtoms([(x, w / total) for x, w in atoms])


def dilate(mu: SpectralMeasure, s: float, grid_points: int = 2001) -> SpectralMeasure:
    """Pushforward of mu under x -> s*x (s > 0); exact for atoms."""
    if s <= 0:
        raise DomainError("dilation factor must be positive")
    if isinstance(mu, DiscreteAtoms):
        return DiscreteAtoms(list(zip(s * mu.positions, mu.weights)))
    e = mu._edges()
    xs = np.linspace(e.left, e.right, grid_points)
    dens = _density_on(mu, xs) / s
    return TabulatedDensity((s * e.left, s * e.right), dens)


def reflect(mu: SpectralMeasure, grid_points: int = 2001) -> SpectralMeasure:
    """Pushforward of mu under x -> -x; exact for atoms and the semicircle."""
    if isinstance(mu, DiscreteAtoms):
        return DiscreteAtoms(list(zip(-mu.positions[::-1], mu.weights[::-1])))
    if isinstance(mu, Semicircle):
        return Semicircle()
    e = mu._edges()
    xs = np.linspace(e.left, e.right, grid_points)
    dens = _density_on(mu, xs)[::-1]
    return TabulatedDensity((-e.right, -e.left), dens)


def _density_on(mu: SpectralMeasure, xs: np.ndarray) -> np.ndarray:
    if isinstance(mu, (Semicircle, MarchenkoPastur)):
        return np.asarray(mu.density(xs), dtype=float)
    if isinstance(mu, TabulatedDensity):
        return np.interp(xs, mu.grid, mu.values)
    raise DomainError(f"no density for {type(mu).__name__}")


def quantiles(mu: SpectralMeasure, n: int) -> np.ndarray:
    """n bulk quantile points x_i = F^{-1}((i - 1/2)/n), sorted ascending.

    For atoms, multiplicities are apportioned by largest remainder.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if isinstance(mu, DiscreteAtoms):
        raw = mu.weights * n
        counts = np.floor(raw).astype(int)
        rem = raw - counts
        for idx in np.argsort(-rem)[: n - counts.sum()]:
            counts[idx] += 1
        return np.repeat(mu.positions, counts)
    e = mu._edges()
    if isinstance(mu, Semicircle):
        cdf = Semicircle.cdf
    else:
        cdf = lambda y: mu._mass(e.left - 1.0, y)
    out = np.empty(n)
    for i in range(n):
        p = (i + 0.5) / n
        out[i] = brentq(lambda y: cdf(y) - p, e.left, e.right, xtol=1e-13)
    return out


# ---------------------------------------------------------------------------
# JSON interface
#
#   {"type": "atoms", "atoms": [[x, w], ...]}
#   {"type": "semicircle"}
#   {"type": "mp", "alpha": 0.25}
#   {"type": "density", "support": [a, b], "values": [...]}


def measure_to_json(mu: SpectralMeasure) -> str:
    return json.dumps(mu.to_json_dict())


def measure_from_json(obj) -> SpectralMeasure:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError("measure JSON must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "atoms":
        return DiscreteAtoms([(float(x), float(w)) for x, w in obj["atoms"]])
    if kind == "semicircle":
        return Semicircle()
    if kind == "mp":
        return MarchenkoPastur(float(obj["alpha"]))
    if kind == "density":
        return TabulatedDensity(tuple(obj["support"]), obj["values"])
    raise DomainError(f"unknown measure type {kind!r}")


def measure_from_spec(spec: str) -> SpectralMeasure:
    """Parse an inline measure name ('semicircle', 'mp:0.25') or a JSON file path."""
    if spec == "semicircle":
        return Semicircle()
    if spec.startswith("mp:"):
        return MarchenkoPastur(float(spec.split(":", 1)[1]))
    with open(spec, "r", encoding="utf-8") as fh:
        return measure_from_json(json.load(fh))
