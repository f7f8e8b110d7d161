"""Model problems: transport and heat generators, spiky multiplier, sweeps."""
import math

import numpy as np
import pytest

from nonauto import (
    DomainTooSmall,
    GrowthBound,
    NormKind,
    Operator,
    PreconditionViolated,
    a_norm,
    build_heat_generator,
    build_spiky_b,
    build_translation_generator,
    decade_maxima,
    expm,
    heat_resolvent_green,
    op_norm,
    resolvent,
    scaled_resolvent_sweep,
    verify_example_bounds,
)
from nonauto.examples import Domain, GridSpec

from oracles import SPIKE_MASS_3


class TestGridSpec:
    def test_domain_parse(self):
        assert Domain.parse("half-line") is Domain.HALF_LINE
        assert Domain.parse("line") is Domain.LINE
        with pytest.raises(PreconditionViolated):
            Domain.parse("circle")

    def test_geometry(self):
        g = GridSpec(8.0, 4, Domain.HALF_LINE)
        assert g.h == 2.0
        assert np.allclose(g.centers(), [1.0, 3.0, 5.0, 7.0])
        sym = GridSpec(8.0, 4, Domain.LINE)
        assert np.allclose(sym.centers(), [-3.0, -1.0, 1.0, 3.0])

    def test_guards(self):
        with pytest.raises(PreconditionViolated):
            GridSpec(0.0, 4, Domain.LINE)
        with pytest.raises(PreconditionViolated):
            GridSpec(1.0, 1, Domain.LINE)

    def test_coarsened(self):
        g = GridSpec(8.0, 1024, Domain.LINE)
        assert g.coarsened(256).points == 256
        assert g.coarsened(2048) is g


class TestGenerators:
    def test_translation_stencil(self):
        g = GridSpec(8.0, 2, Domain.HALF_LINE)
        op = build_translation_generator(g)
        assert op.norm_kind is NormKind.ONE
        assert np.allclose(op.entries, [[-0.25, 0.0], [0.25, -0.25]])

    def test_translation_needs_half_line(self):
        with pytest.raises(PreconditionViolated):
            build_translation_generator(GridSpec(8.0, 4, Domain.LINE))

    def test_heat_stencil(self):
        g = GridSpec(3.0, 3, Domain.LINE)
        op = build_heat_generator(g)
        assert np.allclose(op.entries, [[-2.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -2.0]])

    def test_heat_needs_line(self):
        with pytest.raises(PreconditionViolated):
            build_heat_generator(GridSpec(8.0, 4, Domain.HALF_LINE))

    @pytest.mark.parametrize("which", ["translation", "heat"])
    def test_flows_are_contractions(self, which):
        if which == "translation":
            op = build_translation_generator(GridSpec(8.0, 64, Domain.HALF_LINE))
        else:
            op = build_heat_generator(GridSpec(8.0, 64, Domain.LINE))
        for t in (0.1, 1.0, 5.0):
            assert op_norm(expm(op, t)) <= 1.0 + 1e-10


class TestHeatGreenKernel:
    def test_column_mass_bounded(self):
        mu = 4.0
        g = GridSpec(40.0 / math.sqrt(mu), 512, Domain.LINE)
        k = heat_resolvent_green(g, mu)
        assert op_norm(k) <= (1.0 / mu) * (1.0 + 1e-3)

    def test_interior_column_integrates_kernel(self):
        # away from the boundary the column sum approximates
        # int e^{-sqrt(mu)|x|}/(2 sqrt(mu)) dx = 1/mu
        mu = 1.0
        g = GridSpec(60.0, 1200, Domain.LINE)
        k = heat_resolvent_green(g, mu)
        mid = g.points // 2
        # midpoint rule across the kernel cusp at x = 0 leaves an O(h^2) excess
        assert mu * k.entries[:, mid].sum() == pytest.approx(1.0, rel=5e-4)

    def test_matches_discrete_resolvent_in_the_bulk(self):
        # the Green quadrature and the discrete (mu I - A)^{-1} agree on
        # interior columns once the grid resolves the kernel
        mu = 1.0
        g = GridSpec(40.0, 800, Domain.LINE)
        green = heat_resolvent_green(g, mu)
        disc = resolvent(build_heat_generator(g), mu)
        mid = g.points // 2
        diff = np.abs(green.entries[:, mid] - disc.entries[:, mid]).sum()
        assert diff <= 1e-3 / mu

    def test_mu_guard(self):
        with pytest.raises(PreconditionViolated):
            heat_resolvent_green(GridSpec(8.0, 16, Domain.LINE), 0.0)


class TestSpikyMultiplier:
    def test_single_spike_support(self):
        g = GridSpec(8.0, 8192, Domain.HALF_LINE)
        mult, op = build_spiky_b(g, 1)
        x = g.centers()
        inside = (x >= 1.0) & (x <= 2.0)
        assert set(np.unique(mult.values[inside])) == {1.0}
        assert np.all(mult.values[~inside] == 0.0)
        assert np.allclose(np.diag(op.entries), mult.values)

    def test_peak_value_when_resolved(self):
        # spike 3 has width 3^-4 = 1/81; h < 1/81 resolves it and the peak 9
        g = GridSpec(8.0, 2**16, Domain.HALF_LINE)
        mult, op = build_spiky_b(g, 3, dense=False)
        assert op is None
        assert mult.values.max() == 9.0
        assert mult.unresolved == ()

    def test_unresolved_spikes_reported(self):
        g = GridSpec(8.0, 64, Domain.HALF_LINE)  # h = 1/8 > 2^-4 > 3^-4
        mult, _ = build_spiky_b(g, 3)
        assert mult.unresolved == (2, 3)

    def test_mass_converges_to_partial_zeta(self):
        g = GridSpec(8.0, 2**18, Domain.HALF_LINE)
        mult, _ = build_spiky_b(g, 3, dense=False)
        # midpoint rule error per spike n is at most 2 h n^2
        assert mult.mass == pytest.approx(SPIKE_MASS_3, abs=2.0 * g.h * 9.0 * 3.0)

    def test_domain_too_small(self):
        with pytest.raises(DomainTooSmall):
            build_spiky_b(GridSpec(3.0, 64, Domain.HALF_LINE), 3)

    def test_mirror_needs_line(self):
        with pytest.raises(PreconditionViolated):
            build_spiky_b(GridSpec(8.0, 64, Domain.HALF_LINE), 1, mirror=True)

    def test_mirror_symmetric(self):
        g = GridSpec(10.0, 500, Domain.LINE)
        mult, _ = build_spiky_b(g, 2, mirror=True)
        assert np.allclose(mult.values, mult.values[::-1])

    def test_nmax_guard(self):
        with pytest.raises(PreconditionViolated):
            build_spiky_b(GridSpec(8.0, 64, Domain.HALF_LINE), 0)


class TestScaledResolventSweep:
    @pytest.mark.parametrize("which", ["translation", "heat"])
    def test_matches_dense_resolvent(self, which):
        if which == "translation":
            g = GridSpec(8.0, 64, Domain.HALF_LINE)
            gen = build_translation_generator(g)
        else:
            g = GridSpec(8.0, 64, Domain.LINE)
            gen = build_heat_generator(g)
        rng = np.random.default_rng(4)
        b = rng.uniform(0.0, 2.0, g.points)
        mus = [0.5, 3.0, 40.0]
        rows = scaled_resolvent_sweep(which, g, b, mus)
        for (mu, got) in rows:
            dense = np.diag(b) @ resolvent(gen, mu).entries
            ref = mu * np.abs(dense).sum(axis=0).max()
            assert got == pytest.approx(ref, rel=1e-10)

    def test_guards(self):
        g = GridSpec(8.0, 16, Domain.HALF_LINE)
        with pytest.raises(PreconditionViolated):
            scaled_resolvent_sweep("translation", g, np.ones(8), [1.0])
        with pytest.raises(PreconditionViolated):
            scaled_resolvent_sweep("translation", g, -np.ones(16), [1.0])
        with pytest.raises(PreconditionViolated):
            scaled_resolvent_sweep("translation", g, np.ones(16), [0.0])
        with pytest.raises(PreconditionViolated):
            scaled_resolvent_sweep("advection", g, np.ones(16), [1.0])


class TestDecadeMaxima:
    def test_bucketing(self):
        rows = [(2.0, 1.0), (5.0, 3.0), (20.0, 2.0), (500.0, 7.0)]
        assert decade_maxima(rows) == [(1.0, 3.0), (10.0, 2.0), (100.0, 7.0)]


class TestANormHomogeneity:
    def test_profile_scales_anorm(self):
        g = GridSpec(8.0, 48, Domain.HALF_LINE)
        gen = build_translation_generator(g)
        _, b = build_spiky_b(g, 1)
        gb = GrowthBound(1.0, 0.0)
        base = a_norm(b, gen, gb).value
        scaled = a_norm(Operator(math.sin(1.0) * b.entries, NormKind.ONE), gen, gb).value
        assert scaled == pytest.approx(abs(math.sin(1.0)) * base, rel=1e-10)


class TestVerifyExampleBounds:
    def test_translation_report(self):
        g = GridSpec(8.0, 256, Domain.HALF_LINE)
        report = verify_example_bounds("translation", g, n_max=2, pipeline=False)
        assert report.contraction_pass
        assert report.no_growth_pass
        assert report.assumptions.a1_pass and report.assumptions.a2_pass
        assert report.fitted_k > 0.0
        assert len(report.decades) >= 3

    def test_heat_report_with_pipeline(self):
        g = GridSpec(8.0, 256, Domain.LINE)
        report = verify_example_bounds("heat", g, n_max=2, pipeline=True, pipeline_points=24, pipeline_tol=2e-3)
        assert report.contraction_pass
        assert report.no_growth_pass
        assert report.pipeline_agreement is not None
        assert report.pipeline_agreement <= 5e-3
        assert report.pipeline_levels
        deltas = [row[1] for row in report.pipeline_levels]
        assert deltas[-1] <= 2e-3

    def test_unknown_example_refused(self):
        with pytest.raises(PreconditionViolated):
            verify_example_bounds("advection", GridSpec(8.0, 64, Domain.HALF_LINE))
