"""Piecewise radial profile built on a scaffold: the subharmonic function
phi, its derivative and radial Laplacian (1/r)(r phi')', branch by branch.

Branch layout of generation n (boundaries are the scaffold radii, membership
right-continuous):

    1  [r_{n-1}'', r_n)   phi = (p2+eps_n) log(C/(1-r))
    2  [r_n, r_n')        + slope R_n in log r, Laplacian 0
    3  [r_n', r_hat_n)    lower exponent p1 with linear compensation
    4  [r_hat_n, r_n*)    + mass term M_n int_{r_hat}^r log(r/t) dt
    5  [r_n*, r_n'')      mass term frozen at r_n*

phi stays a plain float (it grows like a multiple of g); phi' and the
Laplacian grow like powers of 1/(1-r) and are returned as LogValues.  The
mass-term integral uses the closed form, so junction residuals reflect
construction error only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .numerics import (
    LogGap,
    LogValue,
    NumericsError,
    gap_diff_log,
    log_int_log_ratio,
    log_r_from_g,
    log_ratio_r,
    lse_sum,
)
from .scaffold import Generation, IrregularScaffold


class ProfileRangeError(NumericsError):
    """Evaluation point beyond the constructed generations."""


@dataclass(frozen=True)
class ProfileValue:
    phi: float
    phi_prime: LogValue
    laplacian: LogValue
    generation: int
    branch: int


@dataclass(frozen=True)
class JunctionJump:
    g: float
    label: str
    phi_rel_jump: float
    dphi_rel_jump: float


class RadialProfile:
    def __init__(self, scaffold: IrregularScaffold):
        self.scaffold = scaffold
        self.params = scaffold.params
        # flat sorted list of (g, generation index, branch starting here)
        self._bounds: list[tuple[float, int, int]] = []
        for i, gen in enumerate(scaffold.generations):
            self._bounds.append((scaffold.generation_start(i), i, 1))
            self._bounds.append((gen.r_n.g, i, 2))
            if gen.r_prime.g < gen.r_hat.g:
                self._bounds.append((gen.r_prime.g, i, 3))
            self._bounds.append((gen.r_hat.g, i, 4))
            self._bounds.append((gen.r_star.g, i, 5))

    @property
    def g_end(self) -> float:
        return self.scaffold.g_end

    def branch_at(self, g: float) -> tuple[int, int]:
        """(generation index, branch id) containing g; right-continuous."""
        if g < 0.0 or g >= self.g_end:
            raise ProfileRangeError(
                f"g = {g} outside constructed range [0, {self.g_end})"
            )
        lo, hi = 0, len(self._bounds) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._bounds[mid][0] <= g:
                lo = mid
            else:
                hi = mid - 1
        _, i, b = self._bounds[lo]
        return i, b

    # -- evaluation ---------------------------------------------------------

    def eval(self, g: LogGap | float) -> ProfileValue:
        gv = g.g if isinstance(g, LogGap) else float(g)
        i, b = self.branch_at(gv)
        gen = self.scaffold.generations[i]
        phi = self._phi(gv, gen, b)
        dphi = self._phi_prime(gv, gen, b)
        lap = self._laplacian(gv, gen, b)
        return ProfileValue(phi, dphi, lap, gen.index, b)

    def phi(self, g: LogGap | float) -> float:
        gv = g.g if isinstance(g, LogGap) else float(g)
        i, b = self.branch_at(gv)
        return self._phi(gv, self.scaffold.generations[i], b)

    def _q1(self, g: float, gen: Generation) -> float:
        """R_n log(r/r_n)."""
        ratio = log_ratio_r(g, gen.r_n.g)
        if ratio == 0.0:
            return 0.0
        return math.exp(gen.log_R + math.log(ratio))

    def _q3(self, g: float, gen: Generation) -> float:
        """p1 (r - r_n')/(1 - r_n')."""
        return self.params.p1 * (-math.expm1(-(g - gen.r_prime.g)))

    def _mass_integral(self, g: float, gen: Generation, upper_g: float) -> float:
        """M_n int_{r_hat}^{min(r*, r)} log(r/t) dt via the closed form."""
        if upper_g <= gen.r_hat.g:
            return 0.0
        span = None
        if upper_g == gen.r_star.g:
            # exact width of [r_hat, r*]: g* - g_hat = -log1p(-1/u_hat)
            span = -math.log1p(-1.0 / (gen.r_hat.g + self.params.log_c))
        return math.exp(gen.log_M + log_int_log_ratio(g, gen.r_hat.g, upper_g, span_ba=span))

    def _phi(self, g: float, gen: Generation, b: int) -> float:
        p1, p2, log_c = self.params.p1, self.params.p2, self.params.log_c
        eps = gen.eps_n
        if b == 1:
            return (p2 + eps) * (g + log_c)
        if b == 2:
            return (p2 + eps) * (gen.r_n.g + log_c) + self._q1(g, gen)
        if b == 3:
            comp = (g - gen.r_prime.g) - (-math.expm1(-(g - gen.r_prime.g)))
            return p1 * (gen.r_prime.g + log_c) + self._q1(g, gen) + p1 * comp
        if b == 4:
            return (
                p1 * (g + log_c)
                + self._q1(g, gen)
                - self._q3(g, gen)
                + self._mass_integral(g, gen, g)
            )
        return (
            p1 * (g + log_c)
            + self._q1(g, gen)
            - self._q3(g, gen)
            + self._mass_integral(g, gen, gen.r_star.g)
        )

    def _phi_prime(self, g: float, gen: Generation, b: int) -> LogValue:
        p1, p2 = self.params.p1, self.params.p2
        log_r = log_r_from_g(g)
        if b == 1:
            return LogValue.pos(math.log(p2 + gen.eps_n) + g)
        terms = [LogValue.pos(gen.log_R - log_r)]
        if b >= 3:
            # p1 (1/(1-r) - 1/(1-r_n')) = p1 e^g (1 - e^{-(g-g')})
            s = g - gen.r_prime.g
            if s > 0.0:
                terms.append(LogValue.pos(math.log(p1) + g + math.log(-math.expm1(-s))))
        if b >= 4:
            # M_n (min(r, r*) - r_hat)/r
            top = min(g, gen.r_star.g)
            if top > gen.r_hat.g:
                terms.append(
                    LogValue.pos(gen.log_M + gap_diff_log(gen.r_hat.g, top) - log_r)
                )
        return lse_sum(terms)

    def _laplacian(self, g: float, gen: Generation, b: int) -> LogValue:
        p1, p2 = self.params.p1, self.params.p2
        log_r = log_r_from_g(g)
        if b == 1:
            return LogValue.pos(math.log(p2 + gen.eps_n) + 2.0 * g - log_r)
        if b == 2:
            return LogValue.zero()
        # p1/r (1/(1-r)^2 - 1/(1-r_n')) = p1 e^{2g} (1 - e^{g'-2g})/r
        base = LogValue.pos(
            math.log(p1) + 2.0 * g + math.log1p(-math.exp(gen.r_prime.g - 2.0 * g)) - log_r
        )
        if b == 4:
            return lse_sum([base, LogValue.pos(gen.log_M - log_r)])
        return base

    # -- diagnostics --------------------------------------------------------

    def junction_report(self) -> list[JunctionJump]:
        """Relative phi and phi' jumps at every interior junction."""
        out = []
        for i, gen in enumerate(self.scaffold.generations):
            spots = [
                (gen.r_n.g, "r_n"),
                (gen.r_prime.g, "r_prime"),
                (gen.r_hat.g, "r_hat"),
                (gen.r_star.g, "r_star"),
            ]
            if i + 1 < len(self.scaffold.generations):
                spots.append((gen.r_dprime.g, "r_dprime"))
            seen = set()
            for gj, label in spots:
                if gj in seen:
                    continue
                seen.add(gj)
                out.append(self._jump_at(gj, f"gen{gen.index}:{label}"))
        return out

    def _jump_at(self, gj: float, label: str) -> JunctionJump:
        il, bl = self.branch_at(math.nextafter(gj, 0.0))
        ir, br = self.branch_at(gj)
        gen_l = self.scaffold.generations[il]
        gen_r = self.scaffold.generations[ir]
        # evaluate both one-sided formulas exactly at the junction
        phi_l = self._phi(gj, gen_l, bl)
        phi_r = self._phi(gj, gen_r, br)
        phi_jump = abs(phi_r - phi_l) / max(abs(phi_l), abs(phi_r), 1e-300)
        dl = self._phi_prime(gj, gen_l, bl)
        dr = self._phi_prime(gj, gen_r, br)
        if dl.is_zero and dr.is_zero:
            dphi_jump = 0.0
        elif dl.is_zero or dr.is_zero or dl.sign != dr.sign:
            dphi_jump = math.inf
        else:
            dphi_jump = abs(math.expm1(dr.logmag - dl.logmag))
        return JunctionJump(gj, label, phi_jump, dphi_jump)

    def ratio_profile(self, gs: Iterable[LogGap | float]) -> list[tuple[float, float]]:
        """(g, phi(g)/g) samples."""
        out = []
        for g in gs:
            gv = g.g if isinstance(g, LogGap) else float(g)
            out.append((gv, self.phi(gv) / gv))
        return out

    def junction_distance(self, g: float) -> float:
        """Distance in g to the nearest branch boundary (or domain edge)."""
        d = min(abs(g - b[0]) for b in self._bounds)
        return min(d, abs(self.g_end - g))

    def laplacian_fd(self, g: float, h: float | None = None) -> tuple[LogValue, float]:
        """Finite-difference radial Laplacian from phi alone (oracle path).

        Uses psi(g) = phi(r(g)): (1/r)(r phi')' = (psi'' + psi') e^{2g}
        + psi' e^g / r, with 4th-order central differences in g.  Returns the
        value and the O(1) inner quantity (psi''+psi') + psi' e^{-g}/r whose
        size calibrates zero-Laplacian branches.
        """
        if h is None:
            h = min(1e-2, 0.15 * self.junction_distance(g))
        if h <= 0.0:
            raise ProfileRangeError(f"no room for a finite-difference stencil at g={g}")
        f = self.phi
        f2p, f1p, f0, f1m, f2m = f(g + 2 * h), f(g + h), f(g), f(g - h), f(g - 2 * h)
        d1 = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h)
        d2 = (-f2p + 16.0 * f1p - 30.0 * f0 + 16.0 * f1m - f2m) / (12.0 * h * h)
        r_log = log_r_from_g(g)
        inner = (d2 + d1) + d1 * math.exp(-g - r_log)
        if inner == 0.0:
            return LogValue.zero(), 0.0
        return LogValue(1 if inner > 0 else -1, 2.0 * g + math.log(abs(inner))), inner

    def write_csv(self, path: str, gs: Sequence[float]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["g", "r", "phi", "phi_over_g", "branch_id"])
            for gv in gs:
                i, b = self.branch_at(gv)
                gen = self.scaffold.generations[i]
                phi = self._phi(gv, gen, b)
                r = f"{LogGap(gv).r:.17g}" if gv <= 36.0 else ""
                w.writerow(
                    [f"{gv:.17g}", r, f"{phi:.17g}", f"{phi / gv:.17g}" if gv > 0 else "",
                     f"g{gen.index}b{b}"]
                )


def branch_samples(profile: RadialProfile, per_branch: int, margin: float = 0.01) -> list[float]:
    """Interior sample points per branch, away from junctions by a fraction
    of the branch width."""
    out = []
    bounds = profile._bounds
    for j, (g_lo, i, b) in enumerate(bounds):
        g_hi = bounds[j + 1][0] if j + 1 < len(bounds) else profile.g_end
        width = g_hi - g_lo
        if width <= 0.0:
            continue
        lo = g_lo + margin * width
        hi = g_hi - margin * width
        if per_branch == 1:
            out.append(0.5 * (lo + hi))
        else:
            step = (hi - lo) / (per_branch - 1)
            out.extend(lo + step * t for t in range(per_branch))
    return out
