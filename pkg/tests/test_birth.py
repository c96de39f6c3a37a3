import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semigroup_lab import (
    am_gm_gap,
    apply_standard,
    arrival_laplace,
    arrival_partial_product,
    band_domain_element,
    band_entry,
    band_functional,
    birth_generator,
    birth_generator_apply,
    birth_resolvent,
    birth_resolvent_entry,
    classical_birth_apply,
    conservativity_defect,
    geometric_band_decay,
    leading_column_report,
    matrix_unit,
    moderate_growth_report,
    no_event_resolvent,
    resolvent_direct,
)
from semigroup_lab.rates import (
    ConstantRates,
    ExplicitRates,
    GeometricRates,
    PolynomialRates,
    RateRangeError,
)

from conftest import random_operator, random_psd

POLY = PolynomialRates(1.0, 2.0)
LINEAR = PolynomialRates(1.0, 1.0)
GEO = GeometricRates(2.0)


class TestBirthGenerator:
    def test_smallest_case(self):
        spec = birth_generator(ExplicitRates((1.0, 3.0)), 2)
        assert np.allclose(spec.K, np.diag([-0.5, -1.5]))
        assert np.allclose(spec.jumps[0], matrix_unit(1, 0, 2))

    def test_entrywise_action_on_units(self):
        spec = birth_generator(POLY, 6)
        for n, m in [(0, 0), (2, 4), (1, 1)]:
            out = apply_standard(spec, matrix_unit(n, m, 6))
            expected = -0.5 * (POLY.mu(n) + POLY.mu(m)) * matrix_unit(n, m, 6) \
                + math.sqrt(POLY.mu(n) * POLY.mu(m)) * matrix_unit(n + 1, m + 1, 6)
            assert np.allclose(out, expected, atol=1e-13)

    def test_diagonal_restriction_is_classical(self, rng):
        dim = 8
        spec = birth_generator(POLY, dim)
        p = rng.random(dim)
        rho = np.diag(p).astype(complex)
        quantum = np.diagonal(apply_standard(spec, rho)).real
        classical = classical_birth_apply(POLY, p)
        assert np.allclose(quantum, classical, atol=1e-13)

    def test_sharp_extension_matches_truncated_generator(self, rng):
        spec = birth_generator(POLY, 9)
        a = random_operator(9, rng)
        assert np.allclose(birth_generator_apply(POLY, a),
                           apply_standard(spec, a), atol=1e-12)

    def test_minimal_dim(self):
        with pytest.raises(ValueError):
            birth_generator(POLY, 1)


class TestClassicalBirth:
    def test_delta_zero(self):
        out = classical_birth_apply(POLY, [1.0, 0.0, 0.0, 0.0])
        assert np.allclose(out, [-POLY.mu(0), POLY.mu(0), 0.0, 0.0])

    def test_telescoping_total(self, rng):
        p = rng.random(6)
        out = classical_birth_apply(POLY, p)
        assert out.sum() == pytest.approx(-POLY.mu(5) * p[5], rel=1e-12)
        p[-1] = 0.0
        assert classical_birth_apply(POLY, p).sum() == pytest.approx(0.0, abs=1e-13)

    def test_zero_input(self):
        assert np.array_equal(classical_birth_apply(POLY, np.zeros(4)), np.zeros(4))


class TestClosedFormResolvent:
    def test_matrix_unit_leading_entry(self):
        dim = 8
        out = birth_resolvent(POLY, 1.0, matrix_unit(2, 5, dim))
        expected = 1.0 / (1.0 + 0.5 * (POLY.mu(2) + POLY.mu(5)))
        assert out[2, 5] == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("rates", [LINEAR, GEO])
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_matches_dense_solve(self, rates, lam, rng):
        dim = 20
        spec = birth_generator(rates, dim)
        rho = random_operator(dim, rng)
        closed = birth_resolvent(rates, lam, rho)
        direct = resolvent_direct(spec, lam, rho)
        assert np.abs(closed - direct).max() <= 1e-10

    def test_dominant_lambda_limit(self):
        values = [lam * birth_resolvent(POLY, lam, matrix_unit(0, 0, 4))[0, 0].real
                  for lam in (1e2, 1e4, 1e6)]
        assert abs(values[-1] - 1.0) < 1e-5
        assert all(abs(b - 1.0) < abs(a - 1.0) for a, b in zip(values, values[1:]))

    def test_entry_accessor_matches_matrix(self, rng):
        dim = 12
        rho = random_operator(dim, rng)
        full = birth_resolvent(POLY, 1.0, rho)
        for n, m in [(0, 0), (5, 7), (11, 11), (11, 3)]:
            entry = birth_resolvent_entry(POLY, 1.0, rho, n, m)
            assert entry == pytest.approx(complex(full[n, m]), rel=1e-12, abs=1e-14)

    def test_sharp_identity_on_resolvent_range(self, rng):
        # G(R rho') = lam R rho' - rho' entrywise on interior indices
        dim = 15
        rho_prime = random_operator(dim, rng, interior=True)
        lam = 2.0
        element = birth_resolvent(POLY, lam, rho_prime)
        action = birth_generator_apply(POLY, element)
        expected = lam * element - rho_prime
        assert np.abs((action - expected)[:dim - 1, :dim - 1]).max() <= 1e-10

    def test_resolvent_map_is_completely_positive(self):
        from semigroup_lab import choi_matrix, is_positive_semidefinite

        choi = choi_matrix(lambda rho: birth_resolvent(POLY, 1.0, rho), 6)
        assert is_positive_semidefinite(choi, tol=1e-10)

    def test_band_element_reconstruction(self):
        # the band element solves (lam - G) sigma = lam sigma - G# sigma, so
        # feeding that source through the resolvent must reproduce it
        dim, lam, q = 25, 1.0, 1
        sigma = band_domain_element(POLY, q, dim)
        source = lam * sigma - birth_generator_apply(POLY, sigma)
        recovered = birth_resolvent(POLY, lam, source)
        assert np.abs((recovered - sigma)[:dim - 1, :dim - 1]).max() <= 1e-12


class TestArrivalProduct:
    def test_lambda_zero(self):
        assert arrival_laplace(POLY, 0.0).value == 1.0

    def test_telescoping_linear_rates(self):
        for count in (5, 50, 500):
            p = arrival_partial_product(LINEAR, 1.0, 0, count)
            assert p == pytest.approx(1.0 / (count + 1), abs=1e-12)

    def test_geometric_bracket(self):
        bracket = arrival_laplace(GEO, 1.0, tail_tol=1e-12)
        assert bracket.value > 0.2
        assert bracket.width <= 1e-10
        assert bracket.lower <= bracket.value <= bracket.upper

    def test_conservative_product_exactly_zero(self):
        # divergent sum of inverse rates certifies a vanishing product
        bracket = arrival_laplace(LINEAR, 1.0, tail_tol=1e-9)
        assert bracket.value == 0.0
        assert bracket.width == 0.0

    def test_constant_rates_product_vanishes(self):
        bracket = arrival_laplace(ConstantRates(2.0), 1.0, tail_tol=1e-9)
        assert bracket.value == 0.0

    def test_explicit_list_flagged(self):
        rates = ExplicitRates(tuple(2.0 ** n for n in range(40)))
        bracket = arrival_laplace(rates, 1.0, tail_tol=0.5)
        assert bracket.list_exhausted
        assert bracket.lower == 0.0
        assert bracket.value == pytest.approx(
            arrival_partial_product(rates, 1.0, 0, 40), rel=1e-12)

    def test_explicit_list_too_short(self):
        with pytest.raises(RateRangeError, match="too short"):
            arrival_laplace(ExplicitRates((1.0, 2.0, 4.0)), 1.0, tail_tol=1e-10)

    def test_n_start_shifts_product(self):
        shifted = arrival_laplace(GEO, 1.0, n_start=3)
        direct = np.prod([1.0 / (1.0 + 1.0 / GEO.mu(j)) for j in range(3, 60)])
        assert shifted.value == pytest.approx(direct, rel=1e-10)


class TestConservativityDefect:
    def test_defect_equals_truncated_product_linear(self):
        # lambda = 1, mu_n = n+1: the truncated defect telescopes to 1/(N+1)
        for dim in (5, 10, 40):
            defect = conservativity_defect(LINEAR, 1.0, matrix_unit(0, 0, dim))
            assert defect == pytest.approx(1.0 / (dim + 1), abs=1e-12)

    def test_defect_decreases_to_zero_conservative(self):
        defects = [conservativity_defect(LINEAR, 1.0, matrix_unit(0, 0, d))
                   for d in (10, 20, 40, 80)]
        assert all(b < a for a, b in zip(defects, defects[1:]))
        assert defects[-1] < 0.02

    def test_defect_converges_to_product_explosive(self):
        limit = arrival_laplace(GEO, 1.0).value
        defect = conservativity_defect(GEO, 1.0, matrix_unit(0, 0, 40))
        assert defect == pytest.approx(limit, abs=1e-11)
        assert defect > 0.1

    def test_constant_rates_defect_decreasing(self):
        rates = ConstantRates(2.0)
        defects = [conservativity_defect(rates, 1.0, matrix_unit(0, 0, d))
                   for d in (5, 10, 20, 40)]
        assert all(b < a for a, b in zip(defects, defects[1:]))

    def test_small_lambda_total_escape(self):
        # explosive rates: as lambda -> 0+ the defect approaches 1
        defect = conservativity_defect(GEO, 1e-6, matrix_unit(0, 0, 60))
        assert defect == pytest.approx(1.0, abs=1e-3)

    def test_telescoping_algebra_identity(self, rng):
        # 1 - sum_k (1 - c_k) prod_{j<k} c_j = prod_j c_j for any c in (0,1)
        c = rng.random(25)
        acc = 0.0
        running = 1.0
        for ck in c:
            acc += (1.0 - ck) * running
            running *= ck
        assert 1.0 - acc == pytest.approx(running, abs=1e-14)


class TestBandFunctionals:
    def test_finite_rank_gives_zero(self):
        rho = matrix_unit(3, 3, 2000)
        est, converged = band_functional(POLY, rho, 0, 1000)
        assert est == 0.0 and converged

    def test_diagonal_band_unit_flux(self):
        est, converged = band_functional(POLY, band_entry(POLY, 0), 0, 10_000)
        assert est == pytest.approx(1.0, abs=1e-12) and converged

    def test_kronecker_table(self):
        for q in (0, 1, 2):
            for qp in (0, 1, 2):
                est, _ = band_functional(POLY, band_entry(POLY, qp), q, 10_000)
                assert abs(est - (1.0 if q == qp else 0.0)) <= 5e-3

    def test_flux_equals_trace_loss_on_domain_elements(self, rng):
        # Phi_0 = -tr(G rho) for resolvent-domain elements
        dim, lam = 40, 1.0
        rho_prime = random_psd(dim, rng)
        rho_prime[-1, :] = 0.0
        rho_prime[:, -1] = 0.0
        element = birth_resolvent(POLY, lam, rho_prime)
        est, _ = band_functional(POLY, element, 0, dim - 2)
        loss = -np.trace(birth_generator_apply(POLY, element)[:dim - 1, :dim - 1]).real
        assert abs(est.real - loss) <= 1e-8 * max(1.0, abs(loss))

    def test_band_trace_grows_to_explosion_time(self):
        tau = sum(1.0 / POLY.mu(n) for n in range(100000))
        traces = [np.trace(band_domain_element(POLY, 0, d)).real
                  for d in (10, 100, 1000)]
        assert all(b > a for a, b in zip(traces, traces[1:]))
        assert traces[-1] == pytest.approx(tau, abs=1e-3)
        assert np.allclose(np.diagonal(band_domain_element(POLY, 0, 6)),
                           [1.0 / POLY.mu(n) for n in range(6)])

    def test_probe_out_of_range_rejected(self):
        with pytest.raises(RateRangeError):
            band_functional(POLY, matrix_unit(0, 0, 10), 0, 50)


class TestModerateGrowth:
    def test_polynomial_is_moderate(self):
        report = moderate_growth_report(POLY, 3, 2000)
        assert report.moderate
        assert report.c_of_q[1] <= 3.0
        assert report.witness is None
        assert report.uniform_c == max(report.c_of_q.values())

    def test_geometric_not_moderate(self):
        report = moderate_growth_report(GEO, 2, 1000)
        assert not report.moderate
        q, n = report.witness
        assert n * abs(1.0 - GEO.mu(n + q) / GEO.mu(n)) == pytest.approx(
            report.c_of_q[q], rel=1e-9)

    def test_constant_rates_trivially_moderate(self):
        report = moderate_growth_report(ConstantRates(5.0), 3, 500)
        assert report.moderate
        assert all(c == 0.0 for c in report.c_of_q.values())


class TestAmGmGap:
    def test_equal_arguments(self):
        assert am_gm_gap(3.0, 3.0) == 0.0

    def test_direct_value(self):
        assert am_gm_gap(1.0, 4.0) == pytest.approx(0.2, rel=1e-14)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            am_gm_gap(0.0, 1.0)

    @given(st.floats(min_value=1e-3, max_value=1e3),
           st.floats(min_value=1e-3, max_value=1e3))
    def test_bounded_by_ratio_gap(self, a, b):
        assert am_gm_gap(a, b) <= (1.0 - b / a) ** 2 + 1e-12


class TestGeometricBandDecay:
    def test_gamma_value(self):
        table = geometric_band_decay(GEO, 1, 1.0, matrix_unit(0, 0, 2), [10])
        assert table.gamma == pytest.approx(2.0 * math.sqrt(2.0) / 3.0, rel=1e-14)

    def test_ground_state_band_vanishes(self):
        table = geometric_band_decay(GEO, 1, 1.0, matrix_unit(0, 0, 2), [100, 300])
        assert all(f <= 1e-6 for f in table.f_values)

    def test_offdiagonal_source_decays_under_envelope(self):
        rho = matrix_unit(0, 1, 2)
        table = geometric_band_decay(GEO, 1, 1.0, rho, [50, 100, 200, 300])
        assert all(f <= e + 1e-15 for f, e in zip(table.f_values, table.envelope))
        assert all(b < a for a, b in zip(table.f_values, table.f_values[1:]))
        assert table.f_values[-1] <= 1e-6

    def test_requires_geometric_rates(self):
        with pytest.raises(TypeError):
            geometric_band_decay(POLY, 1, 1.0, matrix_unit(0, 0, 2), [10])

    def test_flux_vanishes_on_geometric_domain_elements(self):
        # with exponentially growing rates every resolvent image has
        # vanishing band flux, probed here lazily far beyond any truncation
        def source(n, m):
            return 1.0 if (n, m) == (0, 1) else 0.0

        def element(n, m):
            return birth_resolvent_entry(GEO, 1.0, source, n, m)

        est, converged = band_functional(GEO, element, 1, 600)
        assert abs(est) <= 1e-12 and converged


class TestLeadingColumn:
    def test_random_input(self, rng):
        report = leading_column_report(POLY, 1.0, random_operator(20, rng))
        assert report.column == 0
        assert report.max_deviation <= 1e-12

    def test_diagonal_unit(self):
        dim, m = 10, 4
        report = leading_column_report(POLY, 1.0, matrix_unit(m, m, dim))
        assert report.column == m
        assert report.max_deviation <= 1e-14
        column = birth_resolvent(POLY, 1.0, matrix_unit(m, m, dim))[:, m]
        expected = np.zeros(dim, dtype=complex)
        expected[m] = 1.0 / (1.0 + POLY.mu(m))
        assert np.allclose(column, expected, atol=1e-14)

    def test_consistent_with_entry_formula(self, rng):
        dim = 12
        rho = np.zeros((dim, dim), dtype=complex)
        rho[:, 3] = rng.standard_normal(dim)
        report = leading_column_report(POLY, 2.0, rho)
        assert report.column == 3
        assert report.max_deviation <= 1e-13

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            leading_column_report(POLY, 1.0, np.zeros((4, 4)))


class TestNoEventResolvent:
    def test_entrywise_formula(self, rng):
        dim = 7
        rho = random_operator(dim, rng)
        out = no_event_resolvent(POLY, 1.5, rho)
        for n, m in [(0, 0), (3, 5)]:
            expected = rho[n, m] / (1.5 + 0.5 * (POLY.mu(n) + POLY.mu(m)))
            assert out[n, m] == pytest.approx(expected, rel=1e-13)
