"""Dyadic partitions, perturbation families, and the frozen-coefficient scheme."""
import math

import numpy as np
import pytest

from nonauto import (
    CallableFamily,
    ConstantFamily,
    DimensionMismatch,
    DyadicPartition,
    EvolutionFamilyApprox,
    GrowthBound,
    NormKind,
    NormKindMismatch,
    Operator,
    OutOfInterval,
    PiecewiseLinearFamily,
    PreconditionViolated,
    ScaledProfileFamily,
    TabulatedFamily,
    ToleranceNotReached,
    a_norm,
    euler_polygon,
    expm,
    family_from_spec,
    op_norm,
    oracle_solve,
    product_difference_bound,
    refine_to_tolerance,
    verify_generator_derivative,
)
from nonauto.metrics import ANormEvaluator

from oracles import DIAG_U11, DIAG_U22, SCALAR_POLY, sin_modulus


def op2(entries):
    return Operator(np.asarray(entries, dtype=float), NormKind.TWO)


class TestDyadicPartition:
    def test_cells_and_delta(self):
        p = DyadicPartition(0.0, 2.0, 3)
        assert p.cells == 8
        assert p.delta == pytest.approx(0.25)
        assert np.allclose(p.nodes(), np.linspace(0.0, 2.0, 9))

    def test_cell_of(self):
        p = DyadicPartition(0.0, 1.0, 2)
        assert p.cell_of(0.0) == 0
        assert p.cell_of(0.26) == 1
        assert p.cell_of(1.0) == 3

    def test_cell_of_outside(self):
        p = DyadicPartition(0.0, 1.0, 2)
        with pytest.raises(OutOfInterval):
            p.cell_of(1.5)


class TestFamilies:
    def test_call_outside_interval(self):
        fam = ConstantFamily((0.0, 1.0), op2(np.eye(2)))
        with pytest.raises(OutOfInterval):
            fam(2.0)

    def test_constant_modulus_zero(self):
        fam = ConstantFamily((0.0, 1.0), op2(np.eye(2)))
        ev = ANormEvaluator(op2(np.diag([-1.0, -2.0])), GrowthBound(1.0, -1.0))
        assert fam.modulus(0.25, ev) == 0.0

    def test_profile_modulus_factorises(self):
        # Omega(h) = sup |sin t - sin s| ||B0||_A = 2 sin(h/2) ||B0||_A; the
        # interval length makes h an exact multiple of the profile spacing
        a = op2(np.zeros((2, 2)))
        gb = GrowthBound(1.0, 0.0)
        b0 = op2(np.eye(2))
        fam = ScaledProfileFamily((0.0, 8.0), np.sin, b0)
        ev = ANormEvaluator(a, gb)
        b0_norm = a_norm(b0, a, gb).value
        for h in (0.5, 0.125):
            assert fam.modulus(h, ev) == pytest.approx(sin_modulus(h) * b0_norm, rel=1e-4)

    def test_scale_wraps_value_and_modulus(self):
        fam = ScaledProfileFamily((0.0, 3.0), np.sin, op2(np.eye(2))).scale(-2.0)
        assert np.allclose(fam(1.0).entries, -2.0 * math.sin(1.0) * np.eye(2))
        ev = ANormEvaluator(op2(np.diag([-1.0, -2.0])), GrowthBound(1.0, -1.0))
        base = ScaledProfileFamily((0.0, 3.0), np.sin, op2(np.eye(2)))
        assert fam.modulus(0.25, ev) == pytest.approx(2.0 * base.modulus(0.25, ev), rel=1e-12)

    def test_piecewise_linear_interpolates(self):
        fam = PiecewiseLinearFamily([0.0, 1.0, 3.0], [np.zeros((2, 2)), np.eye(2), 3.0 * np.eye(2)])
        assert np.allclose(fam(0.5).entries, 0.5 * np.eye(2))
        assert np.allclose(fam(2.0).entries, 2.0 * np.eye(2))
        assert np.allclose(fam(3.0).entries, 3.0 * np.eye(2))

    def test_piecewise_linear_exact_modulus(self):
        # steepest piece has slope 2 I per unit time; for h <= 1 the modulus
        # is h * 2 ||I||_A exactly
        a = op2(np.zeros((2, 2)))
        ev = ANormEvaluator(a, GrowthBound(1.0, 0.0))
        fam = PiecewiseLinearFamily([0.0, 1.0, 2.0], [np.zeros((2, 2)), 2.0 * np.eye(2), np.eye(2)])
        assert fam.modulus(0.25, ev) == pytest.approx(0.5, rel=1e-9)

    def test_piecewise_linear_guards(self):
        with pytest.raises(DimensionMismatch):
            PiecewiseLinearFamily([0.0, 1.0], [np.eye(2)])
        with pytest.raises(PreconditionViolated):
            PiecewiseLinearFamily([0.0], [np.eye(2)])
        with pytest.raises(PreconditionViolated):
            PiecewiseLinearFamily([0.0, 0.0], [np.eye(2), np.eye(2)])

    def test_tabulated_roundtrip(self, tmp_path):
        path = tmp_path / "family.csv"
        path.write_text(
            "# t, entries row-major\n"
            "0.0, 0.0, 1.0, 0.0, 0.0\n"
            "1.0, 2.0, 1.0, 0.0, 2.0\n"
        )
        fam = TabulatedFamily(str(path))
        assert fam.interval == (0.0, 1.0)
        assert np.allclose(fam(0.5).entries, [[1.0, 1.0], [0.0, 1.0]])

    def test_tabulated_guards(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("# nothing\n")
        with pytest.raises(PreconditionViolated):
            TabulatedFamily(str(empty))
        ragged = tmp_path / "ragged.csv"
        ragged.write_text("0.0, 1.0, 2.0\n1.0, 1.0, 2.0\n")
        with pytest.raises(DimensionMismatch):
            TabulatedFamily(str(ragged))

    def test_family_from_spec_kinds(self):
        const = family_from_spec({"kind": "constant", "interval": [0.0, 1.0], "entries": [[1.0, 0.0], [0.0, 1.0]]})
        assert isinstance(const, ConstantFamily)
        sin = family_from_spec(
            {"kind": "sinusoid", "interval": [0.0, 2.0], "entries": [[1.0]], "amplitude": 0.5, "frequency": 2.0}
        )
        assert sin(1.0).entries[0, 0] == pytest.approx(0.5 * math.sin(2.0))
        pw = family_from_spec({"kind": "piecewise", "nodes": [0.0, 1.0], "mats": [[[0.0]], [[1.0]]]})
        assert pw(0.25).entries[0, 0] == pytest.approx(0.25)

    def test_family_from_spec_tabulated(self, tmp_path):
        path = tmp_path / "fam.csv"
        path.write_text("0.0, 1.0\n2.0, 3.0\n")
        fam = family_from_spec({"kind": "tabulated", "path": str(path)})
        assert fam.interval == (0.0, 2.0)

    def test_family_from_spec_unknown_kind(self):
        with pytest.raises(PreconditionViolated):
            family_from_spec({"kind": "perlin", "interval": [0.0, 1.0]})


class TestEvolutionFamily:
    def test_identity_at_equal_times(self):
        approx = euler_polygon(op2(np.diag([-1.0, -2.0])), ConstantFamily((0.0, 1.0), op2(np.eye(2))), 4)
        assert np.array_equal(approx.evaluate(0.3, 0.3).entries, np.eye(2))

    def test_guards(self):
        a = op2(np.diag([-1.0, -2.0]))
        approx = euler_polygon(a, ConstantFamily((0.0, 1.0), op2(np.eye(2))), 3)
        with pytest.raises(OutOfInterval):
            approx.evaluate(1.5, 0.0)
        with pytest.raises(PreconditionViolated):
            approx.evaluate(0.2, 0.8)
        with pytest.raises(NormKindMismatch):
            EvolutionFamilyApprox(
                Operator(np.eye(2), NormKind.ONE),
                ConstantFamily((0.0, 1.0), op2(np.eye(2))),
                DyadicPartition(0.0, 1.0, 2),
            )
        with pytest.raises(DimensionMismatch):
            EvolutionFamilyApprox(op2(np.eye(3)), ConstantFamily((0.0, 1.0), op2(np.eye(2))), DyadicPartition(0.0, 1.0, 2))
        with pytest.raises(OutOfInterval):
            EvolutionFamilyApprox(a, ConstantFamily((0.0, 1.0), op2(np.eye(2))), DyadicPartition(0.0, 2.0, 2))

    def test_constant_family_collapses_to_semigroup(self):
        a = op2(np.diag([-1.0, -2.0]))
        b0 = op2([[0.0, 0.5], [0.0, 0.0]])
        fam = ConstantFamily((0.0, 1.0), b0)
        gen = op2(a.entries + b0.entries)
        for n in (0, 3, 6):
            approx = euler_polygon(a, fam, n)
            for t, s in ((1.0, 0.0), (0.7, 0.2), (0.5, 0.5)):
                diff = op_norm(approx.evaluate(t, s) - expm(gen, t - s))
                assert diff <= 1e-10

    def test_cocycle_on_dyadic_triples(self):
        a = op2([[-1.0, 1.0], [0.0, -2.0]])
        fam = ScaledProfileFamily((0.0, 1.0), np.sin, op2([[0.0, 1.0], [1.0, 0.0]]))
        approx = euler_polygon(a, fam, 5)
        for (t, r, s) in ((1.0, 0.5, 0.0), (0.75, 0.5, 0.25), (1.0, 0.9375, 0.125)):
            lhs = approx.evaluate(t, s).entries
            rhs = approx.evaluate(t, r).entries @ approx.evaluate(r, s).entries
            assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(lhs).max())

    def test_evaluate_path_matches_pointwise(self):
        a = op2([[-1.0, 0.3], [0.0, -0.5]])
        fam = ScaledProfileFamily((0.0, 1.0), np.cos, op2(np.eye(2)))
        approx = euler_polygon(a, fam, 6)
        ts = [0.2, 0.35, 0.5, 0.8125, 1.0]
        path = approx.evaluate_path(ts, 0.2)
        for t, u in zip(ts, path):
            assert np.allclose(u.entries, approx.evaluate(t, 0.2).entries, atol=1e-13)

    def test_evaluate_path_needs_ascending(self):
        a = op2(np.diag([-1.0, -2.0]))
        approx = euler_polygon(a, ConstantFamily((0.0, 1.0), op2(np.eye(2))), 3)
        with pytest.raises(PreconditionViolated):
            approx.evaluate_path([0.5, 0.25], 0.0)

    def test_scalar_polygon_value(self):
        # dim 1, A = -1, B(t) = sin t: the exact solution at (1, 0) is
        # exp(-cos 1); the level-10 polygon lands within 3e-4
        a = Operator(np.array([[-1.0]]), NormKind.TWO)
        fam = ScaledProfileFamily((0.0, 1.0), np.sin, Operator(np.array([[1.0]]), NormKind.TWO))
        approx = euler_polygon(a, fam, 10)
        assert approx.evaluate(1.0, 0.0).entries[0, 0] == pytest.approx(SCALAR_POLY, abs=3e-4)

    def test_growth_envelope(self):
        a = op2(np.diag([-1.0, -2.0]))
        gb = GrowthBound(1.0, -1.0)
        fam = ScaledProfileFamily((0.0, 1.0), np.sin, op2(0.5 * np.eye(2)))
        ev = ANormEvaluator(a, gb)
        omega1 = fam.sup_anorm(ev)
        approx = euler_polygon(a, fam, 6)
        rng = np.random.default_rng(2)
        for _ in range(20):
            s, t = sorted(rng.uniform(0.0, 1.0, 2))
            bound = gb.m * math.exp((gb.omega0 + gb.m**2 * omega1) * (t - s))
            assert op_norm(approx.evaluate(t, s)) <= bound * (1.0 + 1e-6)


class TestOracle:
    def test_unperturbed_matches_semigroup(self):
        a = op2([[-1.0, 1.0], [0.0, -2.0]])
        fam = ConstantFamily((0.0, 2.0), op2(np.zeros((2, 2))))
        u = oracle_solve(a, fam, 2.0, 0.0, rk_steps=2**10)
        assert op_norm(u - expm(a, 2.0)) <= 1e-8

    def test_diagonal_closed_form(self):
        # A = diag(-1, -2), B(t) = sin t diag(0.5, 0.3): scalar solutions
        # exp(a + c (1 - cos 1)) per mode
        a = op2(np.diag([-1.0, -2.0]))
        fam = ScaledProfileFamily((0.0, 1.0), np.sin, op2(np.diag([0.5, 0.3])))
        u = oracle_solve(a, fam, 1.0, 0.0, rk_steps=2**12)
        assert u.entries[0, 0] == pytest.approx(DIAG_U11, abs=1e-10)
        assert u.entries[1, 1] == pytest.approx(DIAG_U22, abs=1e-10)

    def test_descending_times_refused(self):
        a = op2(np.diag([-1.0]))
        fam = ConstantFamily((0.0, 1.0), op2(np.zeros((1, 1))))
        with pytest.raises(PreconditionViolated):
            oracle_solve(a, fam, 0.2, 0.8)


class TestProductDifference:
    def test_identical_factors(self):
        ms = [op2(np.eye(2) + 0.1 * np.diag([1.0, -1.0]))] * 3
        lhs, rhs = product_difference_bound(ms, ms)
        assert lhs == 0.0

    def test_single_factor_pair(self):
        lhs, rhs = product_difference_bound([op2(2.0 * np.eye(2))], [op2(np.eye(2))])
        assert lhs == pytest.approx(1.0)
        assert rhs == pytest.approx(1.0)

    def test_random_contractions_obey_bound(self):
        rng = np.random.default_rng(9)
        for n in (2, 5, 9):
            a_fac, b_fac = [], []
            for _ in range(n):
                m = rng.standard_normal((3, 3))
                m = 0.9 * m / max(1.0, op_norm(op2(m)))
                a_fac.append(op2(m))
                b_fac.append(op2(m + 0.01 * rng.standard_normal((3, 3))))
            lhs, rhs = product_difference_bound(a_fac, b_fac)
            assert lhs <= rhs * (1.0 + 1e-12)

    def test_mismatched_lengths_refused(self):
        with pytest.raises(DimensionMismatch):
            product_difference_bound([op2(np.eye(2))], [op2(np.eye(2))] * 2)

    def test_empty_refused(self):
        with pytest.raises(PreconditionViolated):
            product_difference_bound([], [])


class TestGeneratorDerivative:
    def test_residual_ladders_decrease(self):
        a = op2(np.diag([-1.0, -2.0]))
        fam = ScaledProfileFamily((0.0, 1.0), np.sin, op2(0.3 * np.eye(2)))
        approx = euler_polygon(a, fam, 10)
        rows = verify_generator_derivative(approx, 0.25)
        forward = [f for _, f, _ in rows]
        adjoint = [g for _, _, g in rows]
        assert forward == sorted(forward, reverse=True)
        assert adjoint == sorted(adjoint, reverse=True)

    def test_hs_must_decrease(self):
        a = op2(np.diag([-1.0]))
        approx = euler_polygon(a, ConstantFamily((0.0, 1.0), op2(np.zeros((1, 1)))), 4)
        with pytest.raises(PreconditionViolated):
            verify_generator_derivative(approx, 0.5, hs=(1e-3, 1e-2))


class TestRefine:
    def test_constant_family_stops_at_level_zero(self):
        a = op2(np.diag([-1.0, -2.0]))
        fam = ConstantFamily((0.0, 1.0), op2(0.5 * np.eye(2)))
        res = refine_to_tolerance(a, fam, GrowthBound(1.0, -1.0), tol=1e-6)
        assert res.approx.partition.cells == 1
        assert res.achieved_delta == 0.0
        assert len(res.levels) == 1

    def test_sinusoid_meets_tolerance(self):
        a = op2(np.diag([-1.0, -2.0]))
        fam = ScaledProfileFamily((0.0, 1.0), np.sin, op2(np.diag([0.5, 0.5])))
        res = refine_to_tolerance(a, fam, GrowthBound(1.0, -1.0), tol=1e-4)
        n_final = res.levels[-1][0]
        assert n_final <= 16
        assert res.achieved_delta <= 1e-4
        # halving the mesh roughly halves the increment
        deltas = [row[1] for row in res.levels if row[1] > 0]
        ratios = [b / a for a, b in zip(deltas, deltas[1:])]
        assert all(0.4 <= r <= 0.6 for r in ratios[1:])
        # every recorded increment sits under its per-level certificate
        for _, delta, _, bound in res.levels:
            assert delta <= bound * (1.0 + 1e-9)

    def test_budget_exhaustion_reports_progress(self):
        a = op2(np.diag([-1.0, -2.0]))
        fam = ScaledProfileFamily((0.0, 1.0), np.sin, op2(np.diag([0.5, 0.5])))
        with pytest.raises(ToleranceNotReached) as exc:
            refine_to_tolerance(a, fam, GrowthBound(1.0, -1.0), tol=1e-14, n_max=3)
        assert exc.value.best_delta > 1e-14
        assert len(exc.value.levels) >= 2
