import math

import numpy as np
import pytest
from scipy.integrate import quad

from semigroup_lab import (
    KernelGrid,
    QuadratureError,
    apply_resolvent,
    apply_semigroup,
    diagonal_slope,
    erfc,
    kernel_trace,
    support_extent,
    trace_loss,
)


def bump_profile(center=2.0, width=0.4):
    return lambda x: math.exp(-0.5 * ((x - center) / width) ** 2)


def bump_kernel(X=10.0, h=0.01, center=2.0, width=0.4):
    return KernelGrid.from_profile(bump_profile(center, width), X, h)


class TestErfc:
    def test_at_zero(self):
        assert erfc(0.0) == 1.0

    def test_reference_value(self):
        # high-precision reference computed from the continued-fraction
        # expansion (mpmath erfc(1))
        assert erfc(1.0) == pytest.approx(0.15729920705028513, abs=1e-15)

    def test_exact_reflection_symmetry(self):
        for x in (0.3, 1.7, 4.0, 26.0):
            assert erfc(-x) == 2.0 - erfc(x)

    def test_moment_integral(self):
        # int_0^inf x erfc(x) dx = 1/4, quadrature of this implementation
        value, _ = quad(lambda x: x * erfc(x), 0.0, 30.0)
        assert value == pytest.approx(0.25, abs=1e-8)

    def test_underflow_to_zero(self):
        assert erfc(40.0) == 0.0

    def test_accuracy_against_arbitrary_precision_oracle(self):
        import mpmath
        x = np.linspace(0.0, 27.0, 301)
        ref = np.array([float(mpmath.erfc(v)) for v in x])
        assert np.abs(erfc(x) - ref).max() <= 1e-10


class TestKernelGrid:
    def test_grid_consistency_enforced(self):
        with pytest.raises(ValueError):
            KernelGrid(X=1.0, h=0.3, values=np.zeros((4, 4)))
        with pytest.raises(ValueError):
            KernelGrid(X=1.0, h=0.5, values=np.zeros((4, 4)))

    def test_csv_round_trip_real(self, tmp_path):
        kernel = bump_kernel(X=2.0, h=0.1)
        path = tmp_path / "kernel.csv"
        kernel.to_csv(path)
        back = KernelGrid.from_csv(path)
        assert back.X == kernel.X and back.h == kernel.h
        assert np.array_equal(back.values, kernel.values)

    def test_csv_round_trip_complex(self, tmp_path):
        grid = KernelGrid.from_profile(lambda x: (1.0 + 0.5j) * math.exp(-x),
                                       1.0, 0.25)
        path = tmp_path / "kernel.csv"
        grid.to_csv(path)
        back = KernelGrid.from_csv(path)
        assert np.allclose(back.values, grid.values, rtol=0, atol=0)

    def test_support_extent(self):
        values = np.zeros((11, 11))
        values[3, 5] = 1.0
        grid = KernelGrid(X=1.0, h=0.1, values=values)
        assert support_extent(grid) == pytest.approx(0.5)
        assert support_extent(KernelGrid(X=1.0, h=0.1, values=np.zeros((11, 11)))) == 0.0


class TestSemigroup:
    def test_short_time_near_identity(self):
        kernel = KernelGrid.from_profile(bump_profile(1.5, 0.3), 6.0, 0.005)
        evolved = apply_semigroup(kernel, 1e-3)
        dev = np.abs(evolved.values - kernel.values).max()
        assert dev <= 5e-2
        finer = np.abs(apply_semigroup(kernel, 2.5e-4).values - kernel.values).max()
        assert finer < 0.5 * dev  # deviation shrinks linearly with t

    def test_boundary_rows_vanish(self):
        evolved = apply_semigroup(bump_kernel(X=8.0, h=0.02), 0.1)
        assert np.abs(evolved.values[0, :]).max() == 0.0
        assert np.abs(evolved.values[:, 0]).max() == 0.0

    def test_sample_point_against_quadrature_oracle(self):
        # independent adaptive quadrature of the image integral at (1, 1)
        # for the windowed ramp profile phi(x) = x exp(-x) (tapered to zero
        # between x = 5 and x = 7 so the far-edge tail control holds)
        def phi(x):
            if x >= 7.0:
                return 0.0
            taper = 1.0 if x <= 5.0 else 0.5 * (1.0 + math.cos(math.pi * (x - 5.0) / 2.0))
            return x * math.exp(-x) * taper

        t, point = 0.1, 1.0
        kernel = KernelGrid.from_profile(phi, 10.0, 0.01)
        evolved = apply_semigroup(kernel, t)
        i = round(point / kernel.h)

        def integrand(xi):
            gauss = math.exp(-(point - xi) ** 2 / (4 * t)) - \
                math.exp(-(point + xi) ** 2 / (4 * t))
            return gauss / (2 * math.sqrt(math.pi * t)) * phi(xi) * phi(xi)

        oracle, err = quad(integrand, 0.0, 10.0, limit=200)
        assert err < 1e-9
        assert evolved.values[i, i].real == pytest.approx(oracle, abs=1e-6)

    def test_composition_property(self):
        kernel = bump_kernel(X=10.0, h=0.01)
        once = apply_semigroup(kernel, 0.2)
        twice = apply_semigroup(apply_semigroup(kernel, 0.1), 0.1)
        assert np.abs(once.values - twice.values).max() <= 1e-4

    def test_positivity_preserved(self):
        kernel = bump_kernel(X=8.0, h=0.02, center=1.5, width=0.3)
        evolved = apply_semigroup(kernel, 0.1)
        gram = 0.5 * (evolved.values + evolved.values.T) * evolved.h
        assert np.linalg.eigvalsh(gram).min() >= -1e-8

    def test_trace_monotone_nonincreasing(self):
        kernel = bump_kernel(X=10.0, h=0.02, center=1.5, width=0.3)
        traces = [kernel_trace(apply_semigroup(kernel, t))
                  for t in (0.05, 0.1, 0.2, 0.4)]
        assert all(b < a for a, b in zip(traces, traces[1:]))
        assert kernel_trace(kernel) > traces[0]

    def test_tail_control_violation_raises(self):
        kernel = bump_kernel(X=4.0, h=0.01, center=3.0, width=0.3)
        with pytest.raises(QuadratureError, match="tail control"):
            apply_semigroup(kernel, 0.5)

    def test_unresolved_time_step_raises(self):
        kernel = bump_kernel(X=4.0, h=0.01, center=1.0, width=0.3)
        with pytest.raises(QuadratureError, match="unresolved"):
            apply_semigroup(kernel, 1e-6)


class TestResolvent:
    def test_boundary_exactly_zero(self):
        resolved = apply_resolvent(bump_kernel(X=6.0, h=0.02), 1.0)
        assert np.abs(resolved.values[0, :]).max() == 0.0
        assert np.abs(resolved.values[:, 0]).max() == 0.0

    def test_sample_point_against_quadrature_oracle(self):
        lam, point = 1.0, 1.0
        profile = bump_profile(2.0, 0.5)
        kernel = KernelGrid.from_profile(profile, 8.0, 0.01)
        resolved = apply_resolvent(kernel, lam)
        i = round(point / kernel.h)

        def integrand(xi):
            f = math.exp(-math.sqrt(lam) * abs(point - xi)) - \
                math.exp(-math.sqrt(lam) * (point + xi))
            return f / (2 * math.sqrt(lam)) * profile(xi) ** 2

        oracle, err = quad(integrand, 0.0, 8.0, limit=200,
                           points=[point])
        assert err < 1e-9
        assert resolved.values[i, i].real == pytest.approx(oracle, abs=1e-6)

    def test_laplace_consistency_with_semigroup(self):
        # split the Laplace integral at T: R_lam w = int_0^T e^{-lam t} S_t w dt
        # + e^{-lam T} R_lam(S_T w); the substitution t = u^2 makes the
        # integrand smooth and vanish at u = 0, so plain trapezoid in u works
        lam, T = 1.0, 0.6
        kernel = KernelGrid.from_profile(bump_profile(1.0, 0.2), 10.0, 0.025)
        resolved = apply_resolvent(kernel, lam)
        u_min = kernel.h  # resolution floor sqrt(4t) >= 2h
        u_grid = np.linspace(u_min, math.sqrt(T), 150)
        du = u_grid[1] - u_grid[0]
        acc = np.zeros_like(kernel.values)
        evolved_at = {}
        for uk in u_grid:
            t = uk * uk
            evolved_at[uk] = apply_semigroup(kernel, t).values
            weight = du if u_min < uk < u_grid[-1] else 0.5 * du
            acc = acc + weight * 2.0 * uk * math.exp(-lam * t) * evolved_at[uk]
        # triangle [0, u_min]: the u-integrand vanishes at u = 0
        acc += 0.5 * u_min * 2.0 * u_min * math.exp(-lam * u_min ** 2) * evolved_at[u_min]
        # exact tail via the semigroup property
        tail_kernel = KernelGrid(X=kernel.X, h=kernel.h,
                                 values=evolved_at[u_grid[-1]])
        acc += math.exp(-lam * T) * apply_resolvent(tail_kernel, lam).values
        assert np.abs(acc - resolved.values).max() <= 1e-4

    def test_unresolved_lambda_raises(self):
        kernel = bump_kernel(X=4.0, h=0.1, center=1.0, width=0.3)
        with pytest.raises(QuadratureError):
            apply_resolvent(kernel, 100.0)


class TestTraceLoss:
    def test_zero_kernel(self):
        zero = KernelGrid(X=1.0, h=0.1, values=np.zeros((11, 11)))
        assert kernel_trace(zero) == 0.0
        assert trace_loss(zero, 0.1) == 0.0

    def test_loss_identity(self):
        kernel = bump_kernel(X=10.0, h=0.01)
        t = 0.1
        evolved = apply_semigroup(kernel, t)
        gap = abs(kernel_trace(evolved) - (kernel_trace(kernel) - trace_loss(kernel, t)))
        assert gap <= 1e-5

    def test_pure_state_loss_is_higher_order(self):
        # boundary-vanishing profile: the diagonal is quadratic at 0, so the
        # loss rate loss(t)/t decays like sqrt(t) instead of a constant
        kernel = KernelGrid.from_profile(lambda x: x * math.exp(-2.0 * x), 8.0, 0.01)
        ratios = [trace_loss(kernel, t) / t for t in (1e-2, 1e-3, 1e-4)]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] <= 0.25 * ratios[0]


class TestDiagonalSlope:
    def test_min_kernel_analytic_slope(self):
        # omega(x, y) = min(x, y) e^{-x-y} has diagonal x e^{-2x}: slope 1
        kernel = KernelGrid.from_function(
            lambda x, y: min(x, y) * math.exp(-x - y), 6.0, 0.01)
        assert diagonal_slope(kernel) == pytest.approx(1.0, abs=1e-3)

    def test_pure_state_zero_slope(self):
        kernel = KernelGrid.from_profile(lambda x: x * math.exp(-x), 6.0, 0.01)
        assert abs(diagonal_slope(kernel)) <= 1e-3

    def test_resolvent_kernel_loss_rate(self):
        # for a resolvent-built kernel the early loss is linear with the
        # boundary slope as its rate
        kernel = apply_resolvent(bump_kernel(X=8.0, h=0.01, center=2.0,
                                             width=0.4), 1.0)
        slope = diagonal_slope(kernel)
        assert slope > 0
        for t in (1e-3, 2e-3, 5e-3, 1e-2):
            assert trace_loss(kernel, t) / t == pytest.approx(slope, rel=0.05)
