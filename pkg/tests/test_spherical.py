"""Limiting spherical integrals: closed forms vs first-principles oracles."""

import math

import numpy as np
import pytest

from sphint import (
    DiscreteAtoms,
    DiscreteModel,
    DomainError,
    MarchenkoPastur,
    OutlierSpec,
    Regime,
    Semicircle,
    ShapeError,
    ThetaSpec,
    conditional_oracle_2d,
    dilate,
    interlacing_roots,
    j_multi,
    j_one,
    reflect,
    simplex_oracle_1d,
    stieltjes,
    transport_identity_check,
    v_star,
)

SC = Semicircle()
D0 = DiscreteAtoms([(0.0, 1.0)])


def brute_force_sup_d0(theta, eta_out, grid=4_000_001):
    """1-d grid oracle for the delta_0 bulk + one outlier model:
    sup_g theta*eta_out*g + ln(1-g) over g in [0, 1)."""
    g = np.linspace(0.0, 1.0 - 1e-12, grid)
    return float(np.max(theta * eta_out * g + np.log1p(-g)))


def random_model(rng, p_max=6, out_max=3):
    p = int(rng.integers(1, p_max + 1))
    bulk = np.sort(rng.uniform(-3, 3, size=p))
    while p > 1 and np.min(np.diff(bulk)) < 0.05:
        bulk = np.sort(rng.uniform(-3, 3, size=p))
    n_top = int(rng.integers(1, out_max + 1))
    n_bot = int(rng.integers(0, out_max + 1 - n_top)) if n_top < out_max else 0
    top = bulk[-1] + np.cumsum(rng.uniform(0.2, 1.5, size=n_top))
    bot = bulk[0] - np.cumsum(rng.uniform(0.2, 1.5, size=n_bot))[::-1] if n_bot else np.array([])
    etas = np.concatenate([bot, bulk, top])
    mult = np.concatenate([
        np.ones(n_bot, dtype=int),
        rng.integers(1, 40, size=p),
        np.ones(n_top, dtype=int),
    ])
    return DiscreteModel(tuple(etas), tuple(int(m) for m in mult), (n_bot, n_bot + p - 1))


class TestVStar:
    def test_atom_tilt_binds(self):
        assert v_star(D0, 2.0, 1.0) == 1.0

    def test_atom_inverse_binds(self):
        assert v_star(D0, 0.5, 1.0) == pytest.approx(2.0, abs=1e-12)

    def test_semicircle_tilt_binds_above_g(self):
        # G(3) = 0.381966 <= 0.5, so the tilt binds and v = lambda
        assert stieltjes(SC, 3.0) < 0.5
        assert v_star(SC, 0.5, 3.0) == 3.0

    def test_semicircle_inverse_branch(self):
        # theta = 0.3 < G(3): v = G^{-1}(0.3) = 0.3 + 1/0.3 on the sub-critical branch
        assert v_star(SC, 0.3, 3.0) == pytest.approx(0.3 + 1 / 0.3, abs=1e-10)

    def test_edge_lambda_uses_inverse(self):
        # lambda = r_mu with diverging discrete edge limit: inverse branch
        assert v_star(D0, 0.5, 0.0) == pytest.approx(2.0, abs=1e-12)

    def test_negative_mirror(self):
        assert v_star(D0, -2.0, -1.0) == -1.0
        assert v_star(D0, -0.5, -1.0) == pytest.approx(-2.0, abs=1e-12)

    def test_sign_mismatch_raises(self):
        with pytest.raises(DomainError):
            v_star(D0, 2.0, -1.0)
        with pytest.raises(DomainError):
            v_star(D0, -2.0, 1.0)
        with pytest.raises(DomainError):
            v_star(D0, 0.0, 1.0)


class TestJOne:
    def test_zero_tilt(self):
        for mu, lam in ((SC, 3.0), (D0, 1.0), (MarchenkoPastur(0.25), 2.5)):
            res = j_one(mu, 0.0, lam)
            assert res.value == 0.0
            assert res.regime is Regime.ZERO_TILT

    def test_atom_theta_one(self):
        # simplex oracle: sup_g {(1-g)*0*1 + 1*g + ln(1-g)} = 0 at g -> computed by grid
        assert brute_force_sup_d0(1.0, 1.0) == pytest.approx(0.0, abs=1e-6)
        assert j_one(D0, 1.0, 1.0).value == pytest.approx(0.0, abs=1e-14)

    def test_atom_theta_two(self):
        oracle = brute_force_sup_d0(2.0, 1.0)
        assert oracle == pytest.approx(1 - math.log(2), abs=1e-6)
        res = j_one(D0, 2.0, 1.0)
        assert res.value == pytest.approx(1 - math.log(2), abs=1e-14)
        assert res.value == pytest.approx(oracle, abs=1e-6)
        assert res.regime is Regime.TILT_BINDS

    def test_semicircle_subcritical_quadratic(self):
        # theta below G(lambda): J = theta^2/2 exactly for the semicircle
        for theta in (0.1, 0.25, 0.38):
            res = j_one(SC, theta, 3.0)
            assert res.regime is Regime.INVERSE_BINDS
            assert res.value == pytest.approx(theta * theta / 2, abs=1e-10)

    def test_continuity_at_zero_tilt(self):
        for theta in (1e-2, 1e-4):
            assert abs(j_one(SC, theta, 3.0).value) < 2 * theta

    def test_regime_boundary_continuity(self):
        g = stieltjes(SC, 3.0)
        lo = j_one(SC, g - 1e-9, 3.0).value
        hi = j_one(SC, g + 1e-9, 3.0).value
        assert lo == pytest.approx(hi, abs=1e-7)

    def test_lambda_derivative(self):
        # dJ/dlambda = max(theta - G(lambda), 0); central differences h=1e-5
        h = 1e-5
        cases = [(SC, 1.5, 3.0), (SC, 0.2, 3.0), (D0, 2.0, 1.0), (MarchenkoPastur(0.25), 1.0, 3.0)]
        for mu, theta, lam in cases:
            fd = (j_one(mu, theta, lam + h).value - j_one(mu, theta, lam - h).value) / (2 * h)
            expected = max(theta - stieltjes(mu, lam), 0.0)
            assert fd == pytest.approx(expected, abs=1e-6)

    def test_theta_monotone_nonneg_support(self):
        # holds when lambda * G(lambda) >= 1 (semicircle, MP, nonnegative atoms)
        for mu, lam in ((SC, 2.5), (MarchenkoPastur(0.25), 3.0), (DiscreteAtoms([(0.0, 0.5), (1.0, 0.5)]), 2.0)):
            vals = [j_one(mu, t, lam).value for t in np.linspace(0.05, 4, 40)]
            assert np.all(np.diff(vals) > -1e-12)

    def test_negative_tilt_mirror(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            atoms = np.sort(rng.uniform(-2, 2, size=3))
            w = rng.dirichlet(np.ones(3))
            mu = DiscreteAtoms(list(zip(atoms, w)))
            theta = rng.uniform(0.1, 3)
            lam = atoms[0] - rng.uniform(0.1, 2)
            left = j_one(mu, -theta, lam).value
            right = j_one(reflect(mu), theta, -lam).value
            assert left == pytest.approx(right, rel=1e-12, abs=1e-12)

    def test_scaling_identity(self):
        # J(mu, theta, lam) = J(dilate(mu, theta), 1, theta*lam)
        rng = np.random.default_rng(8)
        for _ in range(20):
            atoms = np.sort(rng.uniform(-2, 2, size=4))
            w = rng.dirichlet(np.ones(4))
            mu = DiscreteAtoms(list(zip(atoms, w)))
            theta = rng.uniform(0.2, 4)
            lam = atoms[-1] + rng.uniform(0.1, 3)
            lhs = j_one(mu, theta, lam).value
            rhs = j_one(dilate(mu, theta), 1.0, theta * lam).value
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_sup_dominates_feasible_point(self):
        # J >= objective at the zero-outlier-mass feasible point gamma = alpha
        rng = np.random.default_rng(9)
        for _ in range(20):
            model = random_model(rng)
            theta = rng.uniform(0.1, 4)
            mu = model.bulk_measure()
            top = model.etas[-1]
            etas = np.asarray(model.etas)
            alphas = model.alphas
            feasible = theta * float(etas @ alphas)  # entropy term vanishes at gamma = alpha
            assert j_one(mu, theta, top).value >= feasible - 1e-12


class TestJMulti:
    def test_zero_sum(self):
        assert j_multi(SC, ThetaSpec(top=(0.0, 0.0)), OutlierSpec(top=(3.0, 2.5))) == 0.0

    def test_atom_pair(self):
        val = j_multi(D0, ThetaSpec(top=(2.0, 1.0)), OutlierSpec(top=(1.0, 1.0)))
        assert val == pytest.approx(1 - math.log(2), abs=1e-14)

    def test_additivity_equal_args(self):
        val = j_multi(SC, ThetaSpec(top=(1.5, 1.5)), OutlierSpec(top=(3.0, 3.0)))
        assert val == pytest.approx(2 * j_one(SC, 1.5, 3.0).value, abs=1e-14)

    def test_coincident_outliers_allowed(self):
        v1 = j_multi(SC, ThetaSpec(top=(2.0, 1.0)), OutlierSpec(top=(2.7, 2.7)))
        assert v1 == pytest.approx(j_one(SC, 2.0, 2.7).value + j_one(SC, 1.0, 2.7).value, abs=1e-14)

    def test_bottom_pairing(self):
        # most negative tilt pairs with the smallest outlier
        mu = DiscreteAtoms([(0.0, 1.0)])
        thetas = ThetaSpec(bottom=(-1.0, -2.0))  # theta_{-2} = -1 >= theta_{-1} = -2
        lambdas = OutlierSpec(bottom=(-3.0, -1.5))  # lambda_{-1} = -3 <= lambda_{-2} = -1.5
        val = j_multi(mu, thetas, lambdas)
        expected = j_one(mu, -2.0, -3.0).value + j_one(mu, -1.0, -1.5).value
        assert val == pytest.approx(expected, abs=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            j_multi(SC, ThetaSpec(top=(1.0,)), OutlierSpec(top=(3.0, 2.5)))

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            ThetaSpec(top=(1.0, 2.0))  # not descending
        with pytest.raises(DomainError):
            ThetaSpec(top=(-0.5,))
        with pytest.raises(DomainError):
            ThetaSpec(bottom=(-2.0, -1.0))  # must be descending toward theta_{-1}
        with pytest.raises(DomainError):
            OutlierSpec(top=(2.0, 3.0))
        with pytest.raises(DomainError):
            OutlierSpec(bottom=(-1.0, -2.0))  # bottom stored ascending


class TestSimplexOracle:
    def test_grid_case_theta_two(self):
        model = DiscreteModel((0.0, 1.0), (9, 1), (0, 0))
        assert simplex_oracle_1d(model, 2.0) == pytest.approx(1 - math.log(2), abs=1e-9)

    def test_grid_case_theta_one(self):
        model = DiscreteModel((0.0, 1.0), (9, 1), (0, 0))
        assert simplex_oracle_1d(model, 1.0) == pytest.approx(0.0, abs=1e-9)

    def test_theta_zero(self):
        rng = np.random.default_rng(10)
        assert simplex_oracle_1d(random_model(rng), 0.0) == 0.0

    def test_negative_theta_raises(self):
        rng = np.random.default_rng(11)
        with pytest.raises(DomainError):
            simplex_oracle_1d(random_model(rng), -1.0)

    def test_matches_j_one_random_models(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            model = random_model(rng)
            theta = float(rng.uniform(0.1, 5.0))
            expected = j_one(model.bulk_measure(), theta, model.etas[-1]).value
            got = simplex_oracle_1d(model, theta)
            assert abs(got - expected) <= 1e-8 * max(1.0, abs(expected))

    def test_cold_start_alone_converges(self):
        # the optimizer is a genuine oracle: no closed-form warm start needed
        from sphint.spherical import _mirror_ascent, _simplex_gradient, _simplex_objective

        rng = np.random.default_rng(13)
        for _ in range(5):
            model = random_model(rng, p_max=4, out_max=2)
            theta = float(rng.uniform(0.3, 3.0))
            expected = j_one(model.bulk_measure(), theta, model.etas[-1]).value
            n = len(model.etas)
            cold = np.full(n, 1.0 / n)
            _, val = _mirror_ascent(
                lambda g: _simplex_objective(model, theta, g),
                lambda g: _simplex_gradient(model, theta, g),
                cold,
                max_iter=20000,
            )
            assert val == pytest.approx(expected, abs=1e-9)


class TestInterlacingRoots:
    def test_symmetric_pair(self):
        model = DiscreteModel((-1.0, 1.0), (1, 1), (0, 1))
        roots = interlacing_roots(model, [0.5, 0.5])
        assert roots == pytest.approx([0.0], abs=1e-12)

    def test_linear_case(self):
        model = DiscreteModel((0.0, 1.0), (3, 1), (0, 0))
        roots = interlacing_roots(model, [0.75, 0.25])
        assert roots == pytest.approx([0.75], abs=1e-12)

    def test_three_atoms_sign_change(self):
        model = DiscreteModel((0.0, 1.0, 2.0), (1, 1, 1), (0, 2))
        gam = np.array([1 / 3, 1 / 3, 1 / 3])
        roots = interlacing_roots(model, gam)
        assert len(roots) == 2
        etas = np.asarray(model.etas)
        for j, r in enumerate(roots):
            assert etas[j] < r < etas[j + 1]
            f = lambda c: float(np.sum(gam / (c - etas)))
            assert abs(f(r)) < 1e-9 or min(r - etas[j], etas[j + 1] - r) < 1e-11

    def test_zero_weight_endpoint_rule(self):
        # gamma_top = 0 and positive function on the gap: root at the right endpoint
        model = DiscreteModel((0.0, 1.0), (3, 1), (0, 0))
        roots = interlacing_roots(model, [1.0, 0.0])
        assert roots == [1.0]

    def test_simplex_validation(self):
        model = DiscreteModel((0.0, 1.0), (1, 1), (0, 1))
        with pytest.raises(DomainError):
            interlacing_roots(model, [0.9, 0.3])


class TestConditionalOracle2d:
    def test_zero_tilts(self):
        model = DiscreteModel((0.0, 1.0, 2.0), (10, 1, 1), (0, 0))
        assert conditional_oracle_2d(model, 0.0, 0.0) == 0.0

    def test_atom_bulk_two_outliers(self):
        model = DiscreteModel((0.0, 1.0, 2.0), (50, 1, 1), (0, 0))
        mu = model.bulk_measure()
        expected = j_one(mu, 3.0, 2.0).value + j_one(mu, 2.0, 1.0).value
        got = conditional_oracle_2d(model, 3.0, 2.0)
        assert got == pytest.approx(expected, abs=1e-4)

    def test_theta2_zero_reduces_to_1d(self):
        model = DiscreteModel((0.0, 1.0, 2.0), (30, 1, 1), (0, 0))
        got = conditional_oracle_2d(model, 1.7, 0.0)
        assert got == pytest.approx(simplex_oracle_1d(model, 1.7), abs=1e-6)

    def test_top_multiplicity_two(self):
        # both tilts evaluate at the top eta when its multiplicity is >= 2
        model = DiscreteModel((0.0, 1.5), (40, 2), (0, 0))
        mu = model.bulk_measure()
        expected = j_one(mu, 2.5, 1.5).value + j_one(mu, 1.0, 1.5).value
        assert conditional_oracle_2d(model, 2.5, 1.0) == pytest.approx(expected, abs=1e-4)

    def test_needs_two_outliers(self):
        model = DiscreteModel((0.0, 1.0), (5, 1), (0, 0))
        with pytest.raises(DomainError):
            conditional_oracle_2d(model, 2.0, 1.0)

    def test_inverse_regime_case(self):
        # small tilts: the supremum sits at an interior/inverse configuration
        model = DiscreteModel((-1.0, 0.0, 1.0, 4.0, 5.0), (20, 25, 15, 1, 1), (0, 2))
        mu = model.bulk_measure()
        th1, th2 = 0.6, 0.2
        expected = j_one(mu, th1, 5.0).value + j_one(mu, th2, 4.0).value
        assert conditional_oracle_2d(model, th1, th2) == pytest.approx(expected, abs=1e-4)

    def test_with_bottom_outlier_coordinates(self):
        # bottom outliers join the simplex but carry no mass at the optimum
        model = DiscreteModel((-4.0, -1.0, 0.0, 1.0, 3.0, 4.0), (1, 10, 20, 10, 1, 1), (1, 3))
        mu = model.bulk_measure()
        th1, th2 = 1.5, 0.7
        expected = j_one(mu, th1, 4.0).value + j_one(mu, th2, 3.0).value
        assert conditional_oracle_2d(model, th1, th2) == pytest.approx(expected, abs=1e-4)


class TestTransportIdentity:
    def test_degenerate(self):
        assert transport_identity_check(D0, 2.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_atom_case(self):
        assert transport_identity_check(D0, 2.0, 1.0, 1.5) <= 1e-10

    def test_two_atom_bulk(self):
        mu = DiscreteAtoms([(-0.5, 0.4), (0.5, 0.6)])
        assert transport_identity_check(mu, 5.0, 2.0, 3.0) <= 1e-10

    def test_regime_precondition(self):
        # theta below G(lam_low): inverse regime, identity does not apply
        mu = DiscreteAtoms([(0.0, 1.0)])
        with pytest.raises(DomainError):
            transport_identity_check(mu, 0.4, 1.0, 2.0)

    def test_random_instances(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            atoms = np.sort(rng.uniform(-2, 2, size=3))
            w = rng.dirichlet(np.ones(3))
            mu = DiscreteAtoms(list(zip(atoms, w)))
            lam_low = atoms[-1] + rng.uniform(0.05, 1.0)
            lam_high = lam_low + rng.uniform(0.0, 2.0)
            theta = stieltjes(mu, lam_low) + rng.uniform(0.01, 3.0)
            assert transport_identity_check(mu, theta, lam_low, lam_high) <= 1e-10


class TestModelPlumbing:
    def test_alphas_and_measure(self):
        model = DiscreteModel((-3.0, 0.0, 1.0, 4.0), (1, 30, 10, 1), (1, 2))
        a = model.alphas
        assert a[0] == 0.0 and a[-1] == 0.0
        assert a[1] == pytest.approx(0.75) and a[2] == pytest.approx(0.25)
        top, bottom = model.outliers()
        assert top == (4.0,) and bottom == (-3.0,)

    def test_json_round_trip(self):
        model = DiscreteModel((0.0, 1.0), (5, 1), (0, 0))
        back = DiscreteModel.from_json(model.to_json_dict())
        assert back == model

    def test_validation(self):
        with pytest.raises(DomainError):
            DiscreteModel((1.0, 0.0), (1, 1), (0, 1))
        with pytest.raises(ShapeError):
            DiscreteModel((0.0, 1.0), (1,), (0, 0))
        with pytest.raises(DomainError):
            DiscreteModel((0.0, 1.0), (1, 0), (0, 1))
