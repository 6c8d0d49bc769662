"""Piecewise profile: branch values, junction regularity, Laplacian versus a
finite-difference oracle, and the oscillation of phi/g between the two
exponents."""

import csv
import math

import numpy as np
import pytest

from discgrowth.numerics import LogGap
from discgrowth.profiles import ProfileRangeError, RadialProfile, branch_samples
from discgrowth.scaffold import ScaffoldParams, build_scaffold


@pytest.fixture(scope="module")
def ref_profile(ref_scaffold):
    return RadialProfile(ref_scaffold)


class TestEval:
    def test_first_branch_closed_form(self, ref_profile):
        # eps_1 = 0, so phi = p2 (g + log C) on [0, r_1)
        p = ref_profile.params
        g = 0.5 * p.g1
        assert ref_profile.phi(g) == pytest.approx(p.p2 * (g + p.log_c), rel=1e-15)

    def test_laplacian_zero_between_rn_and_rprime(self, ref_profile):
        gen = ref_profile.scaffold.generations[0]
        g = 0.5 * (gen.r_n.g + gen.r_prime.g)
        v = ref_profile.eval(g)
        assert v.branch == 2
        assert v.laplacian.is_zero

    def test_accepts_loggap_and_float(self, ref_profile):
        g = 1.0
        assert ref_profile.eval(LogGap(g)).phi == ref_profile.eval(g).phi

    def test_range_error(self, ref_profile):
        with pytest.raises(ProfileRangeError):
            ref_profile.eval(ref_profile.g_end + 1.0)
        with pytest.raises(ProfileRangeError):
            ref_profile.eval(ref_profile.g_end)

    def test_branch_membership_right_continuous(self, ref_profile):
        gen = ref_profile.scaffold.generations[0]
        assert ref_profile.branch_at(gen.r_n.g)[1] == 2
        assert ref_profile.branch_at(math.nextafter(gen.r_n.g, 0.0))[1] == 1


class TestJunctions:
    def test_phi_jumps(self, ref_profile):
        rpt = ref_profile.junction_report()
        assert len(rpt) >= 12
        assert max(j.phi_rel_jump for j in rpt) <= 1e-9

    def test_phi_prime_jumps(self, ref_profile):
        rpt = ref_profile.junction_report()
        assert max(j.dphi_rel_jump for j in rpt) <= 1e-9

    def test_eps_corruption_breaks_rdprime_junction(self, ref_scaffold):
        # sensitivity oracle: a 1e-3 shift of eps_{n+1} must show up as a
        # visible kink at r_n''
        import dataclasses

        g0 = ref_scaffold.generations[0]
        corrupted = dataclasses.replace(g0, eps_next=g0.eps_next + 1e-3)
        g1 = dataclasses.replace(
            ref_scaffold.generations[1], eps_n=ref_scaffold.generations[1].eps_n + 1e-3
        )
        sc = dataclasses.replace(
            ref_scaffold,
            generations=(corrupted, g1) + ref_scaffold.generations[2:],
        )
        rpt = RadialProfile(sc).junction_report()
        jump = next(j for j in rpt if j.label == "gen1:r_dprime")
        assert jump.phi_rel_jump > 1e-4 or jump.dphi_rel_jump > 1e-4


class TestLaplacian:
    @pytest.mark.parametrize("fixture", ["ref", "wide"])
    def test_matches_finite_differences(self, fixture, ref_scaffold, wide_scaffold):
        sc = ref_scaffold if fixture == "ref" else wide_scaffold
        prof = RadialProfile(sc)
        pts = branch_samples(prof, 1000 // (5 * len(sc.generations)) + 5)
        assert len(pts) >= 100
        for g in pts:
            v = prof.eval(g)
            fd, inner = prof.laplacian_fd(g)
            if v.laplacian.is_zero:
                assert abs(inner) <= 1e-5
            else:
                assert fd.sign == v.laplacian.sign
                assert abs(math.expm1(fd.logmag - v.laplacian.logmag)) <= 1e-5

    def test_thousand_points_per_branch_generation1(self, ref_scaffold):
        prof = RadialProfile(ref_scaffold)
        bounds = [b for b in prof._bounds if b[1] == 0] + [
            (ref_scaffold.generations[0].r_dprime.g, 0, 6)
        ]
        for (g_lo, _, branch), (g_hi, _, _) in zip(bounds, bounds[1:]):
            width = g_hi - g_lo
            gs = np.linspace(g_lo + 0.01 * width, g_hi - 0.01 * width, 1000)
            lap = [prof.eval(g) for g in gs]
            for g, v in zip(gs, lap):
                fd, inner = prof.laplacian_fd(g)
                if v.laplacian.is_zero:
                    assert abs(inner) <= 1e-5
                else:
                    assert abs(math.expm1(fd.logmag - v.laplacian.logmag)) <= 1e-5


class TestRatios:
    def test_ratio_at_rn_approaches_p2(self, ref_profile):
        p = ref_profile.params
        for gen in ref_profile.scaffold.generations[2:]:
            ratio = ref_profile.phi(gen.r_n.g) / gen.r_n.g
            assert abs(ratio - p.p2) <= 0.1 * p.p2

    def test_ratio_at_rprime_approaches_p1_from_above(self, ref_profile):
        p = ref_profile.params
        ratios = [
            ref_profile.phi(gen.r_prime.g) / gen.r_prime.g
            for gen in ref_profile.scaffold.generations
        ]
        for gen, ratio in zip(ref_profile.scaffold.generations[2:], ratios[2:]):
            assert abs(ratio - p.p1) <= 0.1 * p.p1
        assert all(r > p.p1 for r in ratios)
        assert all(a > b for a, b in zip(ratios, ratios[1:]))

    def test_all_ratios_inside_band(self, ref_profile):
        # dense sampling: phi/g confined to [p1 - 0.2, p2 + 0.2] after the
        # first generation settles (the seed region carries the log C offset)
        p = ref_profile.params
        g2 = ref_profile.scaffold.generations[1]
        gs = np.linspace(g2.r_n.g, ref_profile.g_end - 1e-6, 4000)
        ratios = [r for _, r in ref_profile.ratio_profile(gs)]
        lo, hi = p.p1 - 0.2, p.p2 + 0.2
        frac_inside = np.mean([(lo <= r <= hi) for r in ratios])
        assert frac_inside > 0.95
        assert min(ratios) > p.p1  # never dips under the lower exponent

    def test_phi_nondecreasing(self, ref_profile):
        gs = np.linspace(1e-3, ref_profile.g_end - 1e-6, 4000)
        vals = [ref_profile.phi(g) for g in gs]
        assert all(b >= a - 1e-12 * abs(a) for a, b in zip(vals, vals[1:]))
        for g in branch_samples(ref_profile, 20):
            assert ref_profile.eval(g).phi_prime.sign >= 0

    def test_extremes_localized(self, ref_profile):
        sc = ref_profile.scaffold
        gs = np.linspace(sc.generations[0].r_n.g, ref_profile.g_end - 1e-6, 8000)
        ratios = np.array([r for _, r in ref_profile.ratio_profile(gs)])
        g_min = gs[int(np.argmin(ratios))]
        g_max = gs[int(np.argmax(ratios))]
        # min of phi/g sits within O(1) of some r_n', max within O(1) of some r_n
        assert min(abs(g_min - gen.r_prime.g) for gen in sc.generations) < 3.0
        assert min(abs(g_max - gen.r_n.g) for gen in sc.generations) < 3.0


class TestCsv:
    def test_schema_and_determinism(self, ref_profile, tmp_path):
        gs = branch_samples(ref_profile, 3)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        ref_profile.write_csv(str(p1), gs)
        ref_profile.write_csv(str(p2), gs)
        assert p1.read_bytes() == p2.read_bytes()
        with open(p1) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["g", "r", "phi", "phi_over_g", "branch_id"]
        assert len(rows) == len(gs) + 1
        g_col = [float(r[0]) for r in rows[1:]]
        assert g_col == sorted(g_col)
        # r blank once 1-r underflows the raw-radius window
        deep = [r for r in rows[1:] if float(r[0]) > 36.0]
        assert all(r[1] == "" for r in deep)
