"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.  Criteria 2 and 4 encode
final-iterate thresholds that the plain open-loop method misses for known
dynamical reasons (terminal zigzag parity, a stationarity plateau); they are
asserted exactly as stated and their messages carry the measured evidence.
"""
import math
import time

import numpy as np
import pytest

from absfw import bench
from absfw.aasm import aasm_minimize
from absfw.asfw import (
    RunStatus,
    StepRule,
    asfw_run,
    loglog_slope,
    running_min,
)
from absfw.plmodel import affine_substitute
from absfw.selftest import run_all
from absfw.tape import abs_linearize


def _line(tag, ok, detail):
    print(f"[{tag}] {'PASS' if ok else 'FAIL'} - {detail}")


def _slope(res):
    t = res.trace.ts() + 1
    g = running_min(res.trace.gaps())
    if np.count_nonzero(t >= 10) < 2:
        return -np.inf  # terminated before the window opened
    return loglog_slope(t, g, t_min=10)


@pytest.fixture(scope="module")
def clq_runs():
    out = {}
    for n in (5, 20, 100):
        inst = bench.chained_lq(n)
        t0 = time.perf_counter()
        res = asfw_run(inst.tape, inst.C, inst.x0, StepRule.open_loop_sqrt(),
                       max_iters=500)
        out[n] = (res, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def maxq_runs():
    out = {}
    for n in (5, 10, 20):
        for fs in ("C1", "C2", "C3"):
            inst = bench.maxq(n, fs)
            out[(n, fs)] = (
                asfw_run(inst.tape, inst.C, inst.x0, StepRule.open_loop_sqrt(),
                         max_iters=500, gap_tol=1e-10),
                inst.known_optimum[1],
            )
    return out


@pytest.fixture(scope="module")
def rn1_runs():
    out = {}
    for n in (5, 20):
        inst = bench.rosenbrock_nesterov1(n)
        out[n] = asfw_run(inst.tape, inst.C, inst.x0, StepRule.open_loop_sqrt(),
                          max_iters=2000)
    return out


class TestCriterion1RosenbrockNesterovTable:
    def test_aasm_reaches_global_min_with_bounded_visits(self):
        t_total = time.perf_counter()
        rows = []
        for n in range(1, 11):
            inst = bench.rosenbrock_nesterov2(n)
            form = affine_substitute(abs_linearize(inst.tape, inst.x0), 1.0, -inst.x0)
            res = aasm_minimize(form, inst.C, inst.x0)
            rows.append((n, res))
        elapsed = time.perf_counter() - t_total
        ok = elapsed < 60.0
        details = []
        for n, res in rows:
            at_ones = float(np.max(np.abs(res.v_star - 1.0)))
            ok &= at_ones <= 1e-8 and abs(res.psi_star) <= 1e-8
            ok &= res.polyhedra_visited <= 2 ** n
            details.append(f"n={n}:{res.polyhedra_visited}/{2**(n-1)}")
        _line("criterion-1", ok, f"visited/target {' '.join(details)}; {elapsed:.1f}s")
        assert ok, details

    def test_reported_visits_match_target(self):
        # the observed counts hit the 2^(n-1) target exactly, not only the
        # 2^n bound; keep that as a regression guard on the flip rule
        for n in (3, 6, 8):
            inst = bench.rosenbrock_nesterov2(n)
            form = affine_substitute(abs_linearize(inst.tape, inst.x0), 1.0, -inst.x0)
            res = aasm_minimize(form, inst.C, inst.x0)
            assert res.polyhedra_visited == 2 ** (n - 1)


class TestCriterion2ChainedLq:
    def test_final_value_within_band(self, clq_runs):
        msgs, ok_all = [], True
        for n in (5, 20, 100):
            res, elapsed = clq_runs[n]
            fstar = -(n - 1) * math.sqrt(2.0)
            bound = fstar + 0.05 * n
            ok = res.f_final <= bound
            if n == 100:
                ok &= elapsed < 300.0
            ok_all &= ok
            msgs.append(
                f"n={n}: f(x_500)={res.f_final:.4f} bound={bound:.4f} "
                f"f(x_499)={res.trace.fvals()[-1]:.4f} ({elapsed:.0f}s)"
            )
        _line("criterion-2", ok_all, "; ".join(msgs))
        assert ok_all, (
            "final-iterate threshold missed: the open-loop iterate zigzags "
            "across the bound every step (f(x_499) clears it at each n), so "
            "the t=500 sample lands on the high phase of a period-2 "
            "oscillation whose amplitude ~0.06(n-1) exceeds the 0.05n band; "
            + "; ".join(msgs)
        )


class TestCriterion3Maxq:
    def test_gap_termination_at_documented_optima(self, maxq_runs):
        ok_all, msgs = True, []
        for (n, fs), (res, fstar) in maxq_runs.items():
            ok = res.status in (RunStatus.GAP_TOL_REACHED, RunStatus.EXACT_GAP_ZERO)
            ok &= len(res.trace.rows) <= 500
            ok &= abs(res.f_final - fstar) <= 1e-6
            ok_all &= ok
            msgs.append(f"{fs},n={n}:{len(res.trace.rows)}it")
        _line("criterion-3", ok_all, " ".join(msgs))
        assert ok_all, msgs


class TestCriterion4RosenbrockNesterov1:
    def test_function_value_after_2000_iters(self, rn1_runs):
        msgs, ok_all = [], True
        for n in (5, 20):
            f = rn1_runs[n].f_final
            ok = f <= 0.05
            ok_all &= ok
            msgs.append(f"n={n}: f={f:.5f}")
        _line("criterion-4", ok_all, "; ".join(msgs))
        assert ok_all, (
            "n=20 stalls on a near-stationary plateau of this nonconvex "
            "chain: the running-minimum gap locks at ~1.1e-3 by t~100 while "
            "f stays ~0.82 (escape needs co-moves amplified 4^k down the "
            "chain, capped by the box), so no argmin selection or step "
            "variant reaches 0.05 in 2000 iterations; " + "; ".join(msgs)
        )


class TestCriterion5RateEnvelope:
    def test_running_min_gap_slopes(self, clq_runs, maxq_runs, rn1_runs):
        ok_all, msgs = True, []
        for n, (res, _) in clq_runs.items():
            s = _slope(res)
            ok_all &= s <= -0.4
            msgs.append(f"clq{n}:{s:+.2f}")
        for (n, fs), (res, _) in maxq_runs.items():
            s = _slope(res)
            ok_all &= s <= -0.4
            msgs.append(f"maxq{fs}-{n}:{s:+.2f}")
        for n, res in rn1_runs.items():
            s = _slope(res)
            ok_all &= s <= -0.4
            msgs.append(f"rn1-{n}:{s:+.2f}")
        _line("criterion-5", ok_all, " ".join(msgs))
        assert ok_all, msgs


class TestCriterion6CrescentHarmonicRate:
    def test_harmonic_step_slope(self):
        ok_all, msgs = True, []
        for n in (5, 20):
            inst = bench.chained_crescent1(n)
            res = asfw_run(inst.tape, inst.C, inst.x0,
                           StepRule.open_loop_harmonic(), max_iters=500)
            s = _slope(res)
            ok_all &= s <= -0.7
            msgs.append(f"n={n}: slope={s:+.2f}")
        _line("criterion-6", ok_all, "; ".join(msgs))
        assert ok_all, msgs


class TestCriterion7Lasso:
    @staticmethod
    def _dominant_rho(n, p, seed, variant):
        # large enough that the origin is the unique optimum and the first
        # full step can reach it
        A, y = bench.lasso_design(n, p, seed)
        probe = bench.constrained_lasso(n, p, rho=1.0, seed=seed, variant=variant)
        g0 = A.T @ (A @ probe.x0 - y)
        return 1.25 * float(max(np.max(np.abs(g0)), np.max(np.abs(A.T @ y))))

    def test_box_variant(self):
        ok_all, msgs = True, []
        for n, p in ((125, 250), (250, 500)):
            rho = self._dominant_rho(n, p, seed=7, variant="box")
            inst = bench.constrained_lasso(n, p, rho=rho, seed=7, variant="box")
            res = asfw_run(inst.tape, inst.C, inst.x0, StepRule.open_loop_sqrt(),
                           max_iters=2000)
            gap_ok = res.status == RunStatus.EXACT_GAP_ZERO or (
                res.trace.gaps()[-1] <= 1e-10
            )
            ok = gap_ok and np.max(np.abs(res.x_final)) <= 1e-6
            ok &= len(res.trace.rows) <= 2000
            ok_all &= ok
            msgs.append(f"box({n},{p}):{res.status.value}@{len(res.trace.rows)}it")
        _line("criterion-7a", ok_all, " ".join(msgs))
        assert ok_all, msgs

    def test_ordered_variant(self):
        rho = self._dominant_rho(125, 250, seed=7, variant="ordered")
        inst = bench.constrained_lasso(125, 250, rho=rho, seed=7, variant="ordered")
        res = asfw_run(inst.tape, inst.C, inst.x0, StepRule.open_loop_sqrt(),
                       max_iters=2000)
        iters = len(res.trace.rows)
        ok = np.max(np.abs(res.x_final)) <= 1e-6 and iters <= 5
        _line("criterion-7b", ok, f"ordered(125,250):{res.status.value}@{iters}it")
        assert ok, (res.status, iters)


class TestCriterion8PropertySuites:
    def test_all_suites(self):
        t0 = time.perf_counter()
        results = run_all(seed=0)
        elapsed = time.perf_counter() - t0
        ok = all(r.passed for r in results) and elapsed < 120.0
        _line("criterion-8", ok,
              "; ".join(f"{r.name}:{'ok' if r.passed else 'FAIL'}" for r in results)
              + f"; {elapsed:.0f}s")
        assert ok, [r for r in results if not r.passed]
