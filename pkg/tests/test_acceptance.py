"""Acceptance gate: the eleven headline guarantees at publication scale.

Each test pins its tolerances, replica counts, and (where the contract
carries one) a wall-clock budget. Unit tests establish the machinery on
small cases; this suite establishes the claimed laws at the scales the
package advertises. Expect a total runtime around half an hour.
"""

import itertools
import math
import time

import numpy as np
import pytest

from aseplab.clocks import make_rates, sample_clock_window
from aseplab.core import SpeciesConfig, exact_distribution, exact_generator
from aseplab.coupling import check_attractivity, check_monotonicity, couple
from aseplab.dpp import dlaguerre_kernel, q_laplace_bounds
from aseplab.height import height_initial
from aseplab.kernel import HOLE, apply_events_batch
from aseplab.lab.config import spec_from_options
from aseplab.lab.experiments import run_experiment, schedule_times
from aseplab.lab.sequences import replica_rng


def _run(kind, seed, replicas, **overrides):
    spec = spec_from_options(kind, seed=seed, replicas=replicas,
                             overrides=overrides)
    return run_experiment(spec)


def _check(report, name):
    match = [c for c in report.checks if c.name == name]
    assert match, f"no check named {name} in {[c.name for c in report.checks]}"
    return match[0]


# ---------------------------------------------------------------------------
# 1. simulated law equals the matrix exponential on every small system


def _canonical_labelings(w):
    """Every labeling of w sites over three particle classes plus holes,
    one representative per class-relabeling orbit (classes numbered in
    order of first appearance). Order-preserving relabeling conjugates the
    dynamics exactly, so the orbit shares one law."""
    out = []
    for tup in itertools.product((0, 1, 2, 3), repeat=w):
        seen = []
        for v in tup:
            if v and v not in seen:
                seen.append(v)
        if seen == list(range(1, len(seen) + 1)):
            out.append(tup)
    return out


class TestExactLawEquivalence:
    TV_TOL = 0.015
    REPLICAS = 100_000
    TIME_BUDGET = 300.0
    SEED = 1101

    def test_all_small_windows_match_exact_law(self):
        from aseplab.lab.sequences import batch_final_states

        rates = make_rates(1.0, 0.0)
        t0 = time.monotonic()
        worst = (0.0, None)
        n_labelings = 0
        for w in range(1, 7):
            for tup in _canonical_labelings(w):
                li = n_labelings
                n_labelings += 1
                labels = np.array([HOLE if v == 0 else v for v in tup],
                                  dtype=np.int32)
                cfg = SpeciesConfig(0, w - 1, labels)
                gen = exact_generator(cfg, rates)
                p = exact_distribution(
                    gen, np.eye(gen.n_states)[gen.index_of(cfg.labels)], 1.0)

                # integer-encode states so replica outcomes bin in one pass
                vals = np.where(gen.states == HOLE, 0, gen.states).astype(np.int64)
                enc_states = np.zeros(gen.n_states, dtype=np.int64)
                for k in range(w):
                    enc_states = enc_states * 4 + vals[:, k]
                order = np.argsort(enc_states)

                finals = batch_final_states(
                    replica_rng(self.SEED, li), rates, labels, 0, 1.0,
                    self.REPLICAS)
                fv = np.where(finals == HOLE, 0, finals).astype(np.int64)
                enc = np.zeros(self.REPLICAS, dtype=np.int64)
                for k in range(w):
                    enc = enc * 4 + fv[:, k]
                idx = order[np.searchsorted(enc_states[order], enc)]
                counts = np.bincount(idx, minlength=gen.n_states)
                tv = 0.5 * float(np.abs(counts / self.REPLICAS - p).sum())
                if tv > worst[0]:
                    worst = (tv, tup)
                assert tv <= self.TV_TOL, (
                    f"labeling {tup}: TV {tv:.5f} above {self.TV_TOL}")
        elapsed = time.monotonic() - t0
        assert n_labelings == 975
        assert elapsed <= self.TIME_BUDGET, f"took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 2. pathwise coupling invariants never break at scale


class TestCouplingInvariantsAtScale:
    N_RUNS = 10_000
    WINDOW = (-200, 199)            # 400 sites
    HORIZON = 50.0
    TIME_BUDGET = 600.0
    SEED = 2202

    def test_ordering_and_both_height_gap_forms(self):
        rates = make_rates(1.5, 0.5)
        lo, hi = self.WINDOW
        n = hi - lo + 1
        t0 = time.monotonic()
        failures = []
        for rep in range(self.N_RUNS):
            rng = np.random.default_rng((self.SEED, rep))
            u = rng.random(n)
            zeta = SpeciesConfig(lo, hi, np.where(u < 0.6, 1, HOLE).astype(np.int32))
            eta = SpeciesConfig(lo, hi, np.where(u < 0.3, 1, HOLE).astype(np.int32))
            clock = sample_clock_window(rates, lo, hi, self.HORIZON,
                                        self.SEED * 100_000 + rep)
            gap = height_initial(eta).values - height_initial(zeta).values

            ra = check_attractivity(couple([eta, zeta], clock))
            rs = check_monotonicity(couple([eta, zeta], clock),
                                    height_shift=int(gap.max()))
            rc = check_monotonicity(couple([eta, zeta], clock),
                                    closeness=int(np.abs(gap).max()))
            for r in (ra, rs, rc):
                if not r.passed:
                    failures.append((rep, r.property_name, r.first_violation))
        elapsed = time.monotonic() - t0
        assert failures == [], f"{len(failures)} violations, first: {failures[:3]}"
        assert elapsed <= self.TIME_BUDGET, f"took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 3. disagreements travel no faster than the event field


class TestDisagreementSpeedBound:
    N_RUNS = 10_000
    SEED = 3303

    @pytest.mark.parametrize("t_final,edge", [(15.0, 100), (30.0, 160)])
    def test_shrunken_interval_agreement(self, t_final, edge):
        """Two configurations equal on [-edge, edge] and opposite outside,
        driven by one shared event stream; after time t the interval
        shrunk by 4Rt from each side should still agree except on an
        exponentially rare event."""
        rates = make_rates(1.0, 0.0)
        lo, hi = -edge - 40, edge + 40
        n_sites = hi - lo + 1
        shrink = int(4.0 * rates.right * t_final)
        oi, oj = (-edge + shrink) - lo, (edge - shrink) - lo + 1
        assert oi < oj                      # observation region nonempty

        bound = 4.0 * math.exp(-t_final / 3.0)
        sigma = math.sqrt(bound * (1.0 - bound) / self.N_RUNS)

        disagree = 0
        chunk = 2000
        rng = replica_rng(self.SEED, int(t_final))
        for start in range(0, self.N_RUNS, chunk):
            nb = min(chunk, self.N_RUNS - start)
            a = (rng.random((nb, n_sites)) < 0.5)
            b = a.copy()
            outside = np.ones(n_sites, dtype=bool)
            outside[(-edge) - lo:edge - lo + 1] = False
            b[:, outside] = ~b[:, outside]
            la = np.where(a, 1, HOLE).astype(np.int32)
            lb = np.where(b, 1, HOLE).astype(np.int32)

            counts = rng.poisson(n_sites * rates.total * t_final, size=nb)
            total = int(counts.sum())
            sites = rng.integers(lo, hi + 1, size=total, dtype=np.int64)
            dirs = np.ones(total, dtype=np.int8)
            offsets = np.zeros(nb + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            apply_events_batch(la, lo, sites, dirs, offsets)
            apply_events_batch(lb, lo, sites, dirs, offsets)
            disagree += int(np.any(la[:, oi:oj] != lb[:, oi:oj], axis=1).sum())

        freq = disagree / self.N_RUNS
        assert freq <= bound + 3.0 * sigma, (
            f"t={t_final}: {disagree}/{self.N_RUNS} disagreeing runs, "
            f"freq {freq:.5f} above {bound:.5f} + 3*{sigma:.5f}")


# ---------------------------------------------------------------------------
# 4. tagged-particle vs block comparison bound


class TestTaggedBlockBound:
    SEED = 4404

    def test_exhaustive_small_grid(self):
        # every occupation pattern, tag position, added cloud of up to two
        # more discrepancies, three horizons, every threshold y
        for n_sites in (5, 6, 7):
            report = _run("rez-check", self.SEED, 1, mode="exact",
                          exact_sites=n_sites, exact_n_max=3,
                          times="0.5,1,2", checkpoints="1")
            c = _check(report, "exact-bound-sweep")
            assert c.passed, (
                f"{n_sites} sites: worst lhs-rhs = {c.statistic:.3e}")
            assert c.statistic <= 1e-8

    def test_statistical_at_material_size(self):
        report = _run("rez-check", self.SEED + 1, 2000, mode="mc",
                      mc_sites=200, mc_n=20, mc_time=1.0, checkpoints="1")
        assert report.passed, [str(c) for c in report.checks]


# ---------------------------------------------------------------------------
# 5. tracer velocity uniform on [-1, 1]


class TestSpeedLawUniform:
    KS_TOL = 0.05
    REPLICAS = 2000
    TIME_BUDGET = 1800.0
    SEED = 5505

    def test_both_rate_pairs(self):
        t0 = time.monotonic()
        for right, left in ((1.0, 0.0), (1.5, 0.5)):
            report = _run("speed-law", self.SEED, self.REPLICAS,
                          right=right, left=left, checkpoints="1000",
                          ks_tol=self.KS_TOL)
            c = _check(report, "final-velocity-uniform")
            assert c.passed, f"rates ({right},{left}): KS {c.statistic:.4f}"
            assert report.passed, [str(x) for x in report.checks]
        elapsed = time.monotonic() - t0
        assert elapsed <= self.TIME_BUDGET, f"took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 6. all tracer velocities jointly: marginals and translation invariance


class TestSpeedProcessLaw:
    KS_TOL = 0.06
    P_MIN = 0.01
    REPLICAS = 1000
    SEED = 6606

    def test_marginals_and_translation(self):
        report = _run("speed-process", self.SEED, self.REPLICAS,
                      checkpoints="500", pairs="0:5",
                      ks_tol=self.KS_TOL, translation_p_min=self.P_MIN)
        assert report.passed, [str(c) for c in report.checks]
        for n, ks in report.extras["marginal_ks"].items():
            assert ks <= self.KS_TOL, f"class origin {n}: marginal KS {ks:.4f}"


# ---------------------------------------------------------------------------
# 7. height profiles concentrate on the hydrodynamic solution


class TestHeightConcentration:
    REPLICAS = 500
    TGRID = "250,500,1000,2000"
    EXP_BAND = (0.25, 0.45)
    SEED = 7707

    def test_step_deviation_exponent(self):
        report = _run("concentration", self.SEED, self.REPLICAS,
                      initial="step", tgrid=self.TGRID, checkpoints="")
        c = _check(report, "median-deviation-exponent")
        slope = report.extras["fitted_exponent"]
        assert c.passed and self.EXP_BAND[0] <= slope <= self.EXP_BAND[1], (
            f"fitted exponent {slope:.4f} outside {self.EXP_BAND}")

    @pytest.mark.parametrize("rho,lam", [(0.7, 0.2), (0.6, 0.4)])
    def test_two_sided_density_within_scale(self, rho, lam):
        report = _run("concentration", self.SEED + 1, self.REPLICAS,
                      initial="bernoulli", rho=rho, lam=lam,
                      tgrid=self.TGRID, checkpoints="")
        for T in (250, 500, 1000, 2000):
            c = _check(report, f"within-kappa-T23-T{T}")
            assert c.passed and c.statistic >= 0.95, (
                f"(rho,lam)=({rho},{lam}) T={T}: freq {c.statistic:.3f}")


# ---------------------------------------------------------------------------
# 8. seeded cloud after a long burn-in


class TestSeededCloudPerturbation:
    S = 2000.0
    REPLICAS = 200
    SEED = 8808

    def test_narrow_exponent_is_skipped_not_clipped(self):
        # the injection probabilities are invalid for admissible densities
        # at this exponent and scale; the honest outcome is SKIPPED
        report = _run("perturbation", self.SEED, 2,
                      s_time=self.S, gamma=0.01)
        assert report.skipped
        assert "validity" in report.skip_reason

    def test_cloud_statistics_at_valid_exponent(self):
        report = _run("perturbation", self.SEED, self.REPLICAS,
                      s_time=self.S, gamma=0.25, eps=0.2)
        assert not report.skipped
        assert report.extras["conditioned"] == self.REPLICAS
        for name in ("count-near-target", "cloud-right-of-cutoff"):
            c = _check(report, name)
            assert c.passed and c.statistic >= 0.9, (
                f"{name}: freq {c.statistic:.3f} below 0.9")


# ---------------------------------------------------------------------------
# 9. determinantal identities at simulation scale


class TestDeterminantalIdentities:
    REPLICAS = 100_000
    TIME_BUDGET = 1200.0
    SEED = 9909

    def test_zero_truncation_kernel_is_identity(self):
        for beta, n in ((1.0, 30), (3.0, 60)):
            K = dlaguerre_kernel(0.0, beta, n)
            assert np.max(np.abs(K.entries - np.eye(n))) <= 1e-8

    def test_transform_identity_and_smallest_point_law(self):
        t0 = time.monotonic()
        report = _run("qlaplace", self.SEED, self.REPLICAS)   # T=20, x=2
        assert report.passed, [str(c) for c in report.checks]
        assert {c.name for c in report.checks} == {
            "transform-identity-zeta0.1", "transform-identity-zeta1",
            "transform-identity-zeta10"}

        report = _run("min-particle", self.SEED + 1, self.REPLICAS,
                      checkpoints="10,20", x=0, sup_tol=0.01)
        for T in (10, 20):
            c = _check(report, f"min-point-law-T{T}")
            assert c.passed, f"T={T}: sup distance {c.statistic:.5f}"
        elapsed = time.monotonic() - t0
        assert elapsed <= self.TIME_BUDGET, f"took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 10. transform tail inequalities on arbitrary laws


class TestTransformInequalitySweep:
    N_INSTANCES = 1000
    SEED = 1010

    def _samples(self, rng):
        fam = rng.integers(0, 6)
        n = int(rng.integers(50, 400))
        loc = float(rng.uniform(-8, 8))
        scale = float(rng.uniform(0.1, 6.0))
        if fam == 0:
            return np.round(rng.normal(loc, scale, n))
        if fam == 1:
            return rng.poisson(abs(loc) + 1.0, n).astype(float) + round(loc)
        if fam == 2:
            return rng.exponential(scale, n) + loc
        if fam == 3:
            return rng.uniform(loc, loc + 4 * scale, n)
        if fam == 4:
            atoms = rng.normal(loc, scale, 3)
            return rng.choice(atoms, n)
        return rng.standard_t(3, n) * scale + loc

    def test_thousand_randomized_instances(self):
        rng = np.random.default_rng(self.SEED)
        violations = []
        for i in range(self.N_INSTANCES):
            samples = self._samples(rng)
            q = 0.0 if rng.random() < 0.15 else float(rng.uniform(0.0, 0.97))
            b = 0.0 if rng.random() < 0.1 else float(rng.uniform(-4.0, 6.0))
            rep = q_laplace_bounds(samples, q, b)
            if not rep.passed:
                violations.append((i, q, b, rep))
        assert violations == [], f"first violations: {violations[:3]}"


# ---------------------------------------------------------------------------
# 11. observation schedule growth


class TestObservationSchedule:
    COUNT = 201                      # m = 0 .. 200
    SEED = None                      # deterministic

    def test_growth_bound_from_any_start(self):
        starts = list(np.linspace(2.0, 100.0, 99)) + [2.0, math.e, 100.0]
        for s0 in starts:
            seq = schedule_times(float(s0), self.COUNT)
            for m, (s, t) in enumerate(seq):
                assert s >= math.exp(math.sqrt(m)), (
                    f"S0={s0}: S_{m} = {s} below e^sqrt({m})")
                assert t > 0.0
