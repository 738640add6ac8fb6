"""Spectral measure transforms against independent quadrature oracles."""

import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from sphint import (
    DiscreteAtoms,
    DomainError,
    MarchenkoPastur,
    Semicircle,
    TabulatedDensity,
    dilate,
    discretize,
    log_potential,
    measure_from_json,
    measure_to_json,
    quantiles,
    reflect,
    stieltjes,
    stieltjes_inverse,
    support_edges,
)

SC = Semicircle()
MP = MarchenkoPastur(0.25)
D0 = DiscreteAtoms([(0.0, 1.0)])
TWO = DiscreteAtoms([(-1.0, 0.5), (1.0, 0.5)])


def sc_quad(f):
    """Adaptive-quadrature oracle against the semicircle density."""
    val, err = quad(lambda x: f(x) * math.sqrt(4 - x * x) / (2 * math.pi), -2, 2,
                    limit=400, epsabs=1e-13, epsrel=1e-13)
    assert err < 1e-9
    return val


def mp_quad(f, alpha=0.25):
    lm, lp = (1 - math.sqrt(alpha)) ** 2, (1 + math.sqrt(alpha)) ** 2
    val, err = quad(
        lambda x: f(x) * math.sqrt((lp - x) * (x - lm)) / (2 * math.pi * alpha * x),
        lm, lp, limit=400, epsabs=1e-12, epsrel=1e-12)
    assert err < 1e-8
    return val


class TestStieltjes:
    def test_single_atom(self):
        assert stieltjes(D0, 2.0) == pytest.approx(0.5, abs=1e-15)

    def test_two_atoms(self):
        assert stieltjes(TWO, 2.0) == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_semicircle_vs_quadrature(self):
        # derived oracle: quadrature of (z-x)^{-1} against the density
        oracle = sc_quad(lambda x: 1.0 / (3.0 - x))
        assert oracle == pytest.approx(0.381966011250105, abs=1e-10)
        assert stieltjes(SC, 3.0) == pytest.approx(oracle, abs=1e-10)

    def test_semicircle_left_branch(self):
        oracle = sc_quad(lambda x: 1.0 / (-3.0 - x))
        assert stieltjes(SC, -3.0) == pytest.approx(oracle, abs=1e-10)

    def test_mp_vs_quadrature(self):
        for z in (3.0, 2.26, 0.1, -1.0):
            assert stieltjes(MP, z) == pytest.approx(mp_quad(lambda x: 1.0 / (z - x)), abs=1e-9)

    def test_mp_alpha_one(self):
        m = MarchenkoPastur(1.0)
        assert stieltjes(m, 5.0) == pytest.approx(mp_quad(lambda x: 1.0 / (5.0 - x), 1.0), abs=1e-9)

    def test_inside_support_raises(self):
        for mu, z in ((SC, 0.0), (SC, 2.0), (MP, 1.0), (D0, 0.0), (TWO, 1.0)):
            with pytest.raises(DomainError):
                stieltjes(mu, z)

    def test_sign_matches_side(self):
        rng = np.random.default_rng(1)
        for mu in (SC, MP, TWO):
            e = support_edges(mu)
            for _ in range(20):
                zr = e.right + rng.uniform(0.01, 5)
                zl = e.left - rng.uniform(0.01, 5)
                assert stieltjes(mu, zr) > 0
                assert stieltjes(mu, zl) < 0

    def test_monotone_off_support(self):
        # each term (z-x)^{-1} decreases in z; 100 random ordered pairs
        rng = np.random.default_rng(2)
        for mu in (SC, MP, TWO, D0):
            e = support_edges(mu)
            for _ in range(50):
                a, b = np.sort(rng.uniform(0.01, 6, size=2))
                if a == b:
                    continue
                # right branch: z1 = r + a < z2 = r + b, G(z1) > G(z2)
                assert stieltjes(mu, e.right + a) > stieltjes(mu, e.right + b)
                # left branch: z1 = l - b < z2 = l - a, G(z1) > G(z2)
                assert stieltjes(mu, e.left - b) > stieltjes(mu, e.left - a)


class TestStieltjesInverse:
    def test_semicircle_half(self):
        # closed form theta + 1/theta on the sub-critical branch
        assert stieltjes_inverse(SC, 0.5) == pytest.approx(2.5, abs=1e-10)

    def test_single_atom(self):
        assert stieltjes_inverse(D0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_two_atoms(self):
        assert stieltjes_inverse(TWO, 2.0 / 3.0) == pytest.approx(2.0, abs=1e-10)

    def test_theta_zero_raises(self):
        with pytest.raises(DomainError):
            stieltjes_inverse(SC, 0.0)

    def test_edge_sentinel(self):
        # semicircle edge limit is 1; any theta >= 1 has no inverse beyond r
        assert stieltjes_inverse(SC, 1.0) == 2.0
        assert stieltjes_inverse(SC, 3.7) == 2.0
        assert stieltjes_inverse(SC, -1.2) == -2.0
        mp = MarchenkoPastur(0.25)
        glim = 1.0 / (0.25 + 0.5)
        assert stieltjes_inverse(mp, glim + 0.1) == support_edges(mp).right

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for mu in (SC, MP, TWO, D0):
            lim_r = {SC: 1.0, MP: 1.0 / 0.75}.get(mu, 50.0)
            for _ in range(50):
                theta = rng.uniform(1e-3, lim_r * 0.999)
                v = stieltjes_inverse(mu, theta)
                assert stieltjes(mu, v) == pytest.approx(theta, rel=1e-9)
            lim_l = {SC: 1.0, MP: 1.0 / 0.25}.get(mu, 50.0)
            for _ in range(50):
                theta = -rng.uniform(1e-3, lim_l * 0.999)
                v = stieltjes_inverse(mu, theta)
                assert stieltjes(mu, v) == pytest.approx(theta, rel=1e-9)


class TestLogPotential:
    def test_single_atom(self):
        assert log_potential(D0, math.e) == pytest.approx(1.0, abs=1e-14)

    def test_two_atoms(self):
        assert log_potential(TWO, 2.0) == pytest.approx(math.log(3) / 2, abs=1e-14)

    def test_semicircle_vs_quadrature(self):
        # oracle with explicit singular-point splitting at the evaluation point
        for v in (2.0, 2.5, 3.0, -2.2, 1.0, 0.0):
            pts = [v] if -2 < v < 2 else None
            oracle, err = quad(lambda x: math.log(abs(v - x)) * math.sqrt(4 - x * x) / (2 * math.pi),
                               -2, 2, points=pts, limit=400, epsabs=1e-13, epsrel=1e-13)
            assert err < 1e-9
            assert log_potential(SC, v) == pytest.approx(oracle, abs=1e-9)

    def test_semicircle_edge_value(self):
        assert log_potential(SC, 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_mp_vs_quadrature(self):
        for v in (2.5, 3.0, 0.1, -0.5):
            assert log_potential(MP, v) == pytest.approx(mp_quad(lambda x: math.log(abs(v - x))), abs=1e-8)

    def test_derivative_is_stieltjes(self):
        # d/dv int ln|v-x| dmu = G(v) off support; central differences h=1e-5
        h = 1e-5
        for mu, v in ((SC, 2.7), (SC, -2.5), (MP, 3.1), (TWO, 1.9), (D0, 0.8)):
            fd = (log_potential(mu, v + h) - log_potential(mu, v - h)) / (2 * h)
            assert fd == pytest.approx(stieltjes(mu, v), abs=1e-6)


class TestSupportEdges:
    def test_semicircle(self):
        e = support_edges(SC)
        assert (e.left, e.right) == (-2.0, 2.0)

    def test_mp(self):
        e = support_edges(MP)
        assert e.left == pytest.approx(0.25, abs=1e-15)
        assert e.right == pytest.approx(2.25, abs=1e-15)

    def test_atom(self):
        e = support_edges(D0)
        assert (e.left, e.right) == (0.0, 0.0)


class TestDiscretize:
    def test_atom_at_bin_edge(self):
        d = discretize(D0, 0.0, 0.5)
        assert d.positions.tolist() == [0.0]
        assert d.weights.tolist() == [1.0]

    def test_semicircle_four_bins(self):
        d = discretize(SC, -2.0, 1.0)
        assert d.positions.tolist() == [-2.0, -1.0, 0.0, 1.0]
        # bin masses from the closed-form CDF oracle
        cdf = Semicircle.cdf
        masses = [cdf(a + 1) - cdf(a) for a in (-2.0, -1.0, 0.0, 1.0)]
        assert d.weights == pytest.approx(masses, abs=1e-12)

    def test_atoms_on_boundaries(self):
        d = discretize(TWO, -1.0, 0.5)
        assert d.positions.tolist() == [-1.0, 1.0]
        assert d.weights.tolist() == [0.5, 0.5]

    def test_bad_epsilon(self):
        with pytest.raises(DomainError):
            discretize(SC, -2.0, 0.0)
        with pytest.raises(DomainError):
            discretize(SC, -2.0, -1.0)

    def test_lo_above_left_edge(self):
        with pytest.raises(DomainError):
            discretize(SC, -1.5, 0.5)

    @pytest.mark.parametrize("mu", [SC, MP, TWO])
    def test_weak_convergence(self, mu):
        # bounded 1-Lipschitz test function: |int f dmu_eps - int f dmu| <= eps
        f = np.vectorize(lambda x: math.sin(x))
        e = support_edges(mu)
        for eps in (0.5, 0.1, 0.02):
            d = discretize(mu, e.left, eps)
            approx = float(np.sum(d.weights * f(d.positions)))
            if isinstance(mu, DiscreteAtoms):
                exact = float(np.sum(mu.weights * f(mu.positions)))
            elif isinstance(mu, Semicircle):
                exact = sc_quad(lambda x: math.sin(x))
            else:
                exact = mp_quad(lambda x: math.sin(x))
            assert abs(approx - exact) <= eps

    def test_every_point_moves_at_most_eps(self):
        eps = 0.3
        d = discretize(TWO, -1.2, eps)
        for x in TWO.positions:
            assert np.min(np.abs(d.positions - x)) <= eps


class TestConstructionValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(DomainError):
            DiscreteAtoms([(0.0, 0.5), (1.0, 0.4)])

    def test_positions_increasing(self):
        with pytest.raises(DomainError):
            DiscreteAtoms([(1.0, 0.5), (0.0, 0.5)])

    def test_positive_weights(self):
        with pytest.raises(DomainError):
            DiscreteAtoms([(0.0, 1.0), (1.0, 0.0)])

    def test_mp_alpha_range(self):
        with pytest.raises(DomainError):
            MarchenkoPastur(0.0)
        with pytest.raises(DomainError):
            MarchenkoPastur(1.5)

    def test_tabulated_normalization(self):
        xs = np.linspace(-1, 1, 101)
        vals = np.ones_like(xs)  # integrates to 2
        with pytest.raises(DomainError):
            TabulatedDensity((-1.0, 1.0), vals)
        TabulatedDensity((-1.0, 1.0), vals / 2.0)


class TestTabulated:
    def setup_method(self):
        xs = np.linspace(-2, 2, 4001)
        vals = Semicircle.density(xs)
        vals = vals / np.trapezoid(vals, xs)  # grid resolution is the caller's responsibility
        self.tab = TabulatedDensity((-2.0, 2.0), vals)

    def test_stieltjes_close_to_semicircle(self):
        assert stieltjes(self.tab, 3.0) == pytest.approx(stieltjes(SC, 3.0), abs=1e-5)

    def test_log_potential_close(self):
        assert log_potential(self.tab, 2.5) == pytest.approx(log_potential(SC, 2.5), abs=1e-5)

    def test_round_trip_json(self):
        back = measure_from_json(measure_to_json(self.tab))
        assert isinstance(back, TabulatedDensity)
        assert stieltjes(back, 3.0) == pytest.approx(stieltjes(self.tab, 3.0), abs=1e-14)


class TestTransforms:
    def test_dilate_atoms(self):
        d = dilate(TWO, 2.0)
        assert d.positions.tolist() == [-2.0, 2.0]

    def test_reflect_atoms(self):
        r = reflect(DiscreteAtoms([(0.0, 0.25), (1.0, 0.75)]))
        assert r.positions.tolist() == [-1.0, 0.0]
        assert r.weights.tolist() == [0.75, 0.25]

    def test_reflect_semicircle(self):
        assert isinstance(reflect(SC), Semicircle)

    def test_quantiles_semicircle(self):
        qs = quantiles(SC, 101)
        assert qs[50] == pytest.approx(0.0, abs=1e-10)
        assert np.all(np.diff(qs) > 0)
        # quantiles empirical mean of x^2 approaches the semicircle second moment 1
        assert float(np.mean(qs**2)) == pytest.approx(1.0, abs=2e-2)

    def test_quantiles_mp_mean(self):
        qs = quantiles(MP, 200)
        assert float(np.mean(qs)) == pytest.approx(1.0, abs=2e-2)  # MP mean is 1
        assert qs[0] > 0.25 and qs[-1] < 2.25

    def test_quantiles_atoms_multiplicities(self):
        qs = quantiles(TWO, 10)
        assert np.sum(qs == -1.0) == 5 and np.sum(qs == 1.0) == 5


class TestJsonInterface:
    @pytest.mark.parametrize("mu", [SC, MP, TWO])
    def test_round_trip(self, mu):
        back = measure_from_json(json.loads(measure_to_json(mu)))
        assert type(back) is type(mu)
        e1, e2 = support_edges(mu), support_edges(back)
        assert (e1.left, e1.right) == (e2.left, e2.right)

    def test_bad_json(self):
        with pytest.raises(DomainError):
            measure_from_json({"no_type": 1})
        with pytest.raises(DomainError):
            measure_from_json({"type": "bogus"})
