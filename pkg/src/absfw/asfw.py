"""Outer conditional-gradient loop for abs-smooth objectives.

Per iteration: abs-linearize the tape at the iterate, pose the piecewise
linear subproblem min over v in C of the model increment at alpha*(v - x),
solve it with the active-signature method, record the generalized gap
-increment/alpha, and take the convex-combination step.  A vanishing gap
certifies first-order minimality, so the loop stops early when the gap hits
zero (or the configured tolerance).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .aasm import AasmOptions, aasm_minimize
from .plmodel import AbsLinearForm, affine_substitute, delta_eval
from .polyhedron import Polyhedron, contains
from .tape import Tape, abs_linearize, evaluate

OPEN_LOOP_SQRT = "sqrt"
OPEN_LOOP_HARMONIC = "harmonic"
FIXED_HORIZON = "fixed"
SHORT_STEP = "short"


@dataclass(frozen=True)
class StepRule:
    """Step-size schedule; ``monotone`` adds the keep-iterate acceptance test."""

    kind: str
    T: int | None = None
    gamma: float | None = None
    monotone: bool = False

    def __post_init__(self):
        if self.kind == FIXED_HORIZON and (self.T is None or self.T < 1):
            raise ValueError("fixed-horizon rule needs T >= 1")
        if self.kind == SHORT_STEP and (self.gamma is None or self.gamma <= 0):
            raise ValueError("short-step rule needs gamma > 0")
        if self.kind not in (OPEN_LOOP_SQRT, OPEN_LOOP_HARMONIC, FIXED_HORIZON, SHORT_STEP):
            raise ValueError(f"unknown step rule {self.kind!r}")

    @classmethod
    def open_loop_sqrt(cls, monotone: bool = False):
        return cls(kind=OPEN_LOOP_SQRT, monotone=monotone)

    @classmethod
    def open_loop_harmonic(cls, monotone: bool = False):
        return cls(kind=OPEN_LOOP_HARMONIC, monotone=monotone)

    @classmethod
    def fixed_horizon(cls, T: int, monotone: bool = False):
        return cls(kind=FIXED_HORIZON, T=T, monotone=monotone)

    @classmethod
    def short_step(cls, gamma: float, monotone: bool = False):
        return cls(kind=SHORT_STEP, gamma=gamma, monotone=monotone)

    def alpha(self, t: int) -> float:
        if self.kind == OPEN_LOOP_SQRT:
            return 1.0 / math.sqrt(1.0 + t)
        if self.kind == OPEN_LOOP_HARMONIC:
            return 2.0 / (t + 2.0)
        if self.kind == FIXED_HORIZON:
            return 1.0 / math.sqrt(self.T)
        raise ValueError("short-step alpha is computed from the subproblem")


class RunStatus(Enum):
    GAP_TOL_REACHED = "gap_tol_reached"
    MAX_ITERS = "max_iters"
    EXACT_GAP_ZERO = "exact_gap_zero"


@dataclass(frozen=True)
class TraceRow:
    t: int
    alpha: float
    gap: float
    fval: float
    inner_polyhedra: int
    lp_calls: int
    elapsed_ms: int


@dataclass
class RunTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def append(self, row: TraceRow):
        self.rows.append(row)

    def gaps(self) -> np.ndarray:
        return np.array([r.gap for r in self.rows])

    def fvals(self) -> np.ndarray:
        return np.array([r.fval for r in self.rows])

    def ts(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])


@dataclass(frozen=True)
class RunResult:
    x_final: np.ndarray
    f_final: float
    status: RunStatus
    trace: RunTrace


def generalized_gap(form: AbsLinearForm, fbar: float, x, v, alpha: float) -> float:
    """-model increment at alpha*(v - x), divided by alpha; for smooth tapes
    this collapses to the classical inner product <-grad f(x), v - x>."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    x = np.asarray(x, dtype=float)
    sub = affine_substitute(form, alpha, -alpha * x)
    return -delta_eval(sub, fbar, v) / alpha


def asfw_run(
    tape: Tape,
    C: Polyhedron,
    x0,
    rule: StepRule,
    max_iters: int = 500,
    gap_tol: float = 1e-10,
    aasm_opts: AasmOptions | None = None,
    trace_sink=None,
) -> RunResult:
    """Run the conditional-gradient loop from a feasible x0.

    Stops with EXACT_GAP_ZERO when the subproblem cannot improve at all,
    GAP_TOL_REACHED when the gap falls to gap_tol, otherwise MAX_ITERS.
    ``trace_sink`` receives each TraceRow as it is produced.
    """
    x = np.asarray(x0, dtype=float).copy()
    if not contains(C, x, 1e-9):
        raise ValueError("x0 must be feasible")
    if gap_tol < 0:
        raise ValueError("gap_tol must be nonnegative")
    opts = aasm_opts or AasmOptions()
    trace = RunTrace()
    status = RunStatus.MAX_ITERS
    t_start = time.perf_counter()

    for t in range(max_iters):
        fbar = evaluate(tape, x).y
        form = abs_linearize(tape, x)

        if rule.kind == SHORT_STEP:
            sub = affine_substitute(form, 1.0, -x)
            inner = aasm_minimize(sub, C, x, opts)
            v = inner.v_star
            dec = inner.psi_star - fbar  # = model increment at v - x
            nrm2 = float(np.dot(v - x, v - x))
            if dec >= 0.0 or nrm2 == 0.0:
                alpha = 1.0
            else:
                alpha = min(1.0, -dec / (2.0 * rule.gamma * nrm2))
            gap = -dec  # alpha = 1 subproblem gap
        else:
            alpha = rule.alpha(t)
            sub = affine_substitute(form, alpha, -alpha * x)
            inner = aasm_minimize(sub, C, x, opts)
            v = inner.v_star
            gap = generalized_gap(form, fbar, x, v, alpha)

        row = TraceRow(
            t=t,
            alpha=float(alpha),
            gap=float(gap),
            fval=float(fbar),
            inner_polyhedra=inner.polyhedra_visited,
            lp_calls=inner.lp_calls,
            elapsed_ms=int(1000 * (time.perf_counter() - t_start)),
        )
        trace.append(row)
        if trace_sink is not None:
            trace_sink(row)

        if gap <= 0.0:
            status = RunStatus.EXACT_GAP_ZERO
            break
        if gap <= gap_tol:
            status = RunStatus.GAP_TOL_REACHED
            break

        if alpha <= 0.0:
            status = RunStatus.EXACT_GAP_ZERO
            break
        x_next = (1.0 - alpha) * x + alpha * v
        if rule.monotone and evaluate(tape, x_next).y >= fbar:
            continue  # keep the current iterate
        x = x_next

    return RunResult(
        x_final=x,
        f_final=evaluate(tape, x).y,
        status=status,
        trace=trace,
    )


def running_min(values) -> np.ndarray:
    return np.minimum.accumulate(np.asarray(values, dtype=float))


def loglog_slope(ts, values, t_min: int = 10, samples: int = 200) -> float:
    """Least-squares slope of log(values) against log(t) over [t_min, t_end].

    The curve is resampled uniformly in log(t) before fitting, which is the
    slope a log-log plot shows; fitting per-iteration instead would weight
    the final decade roughly t_end/t_min times more than the first.
    Returns -inf when the windowed values reach zero (faster than any rate).
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = ts >= t_min
    ts, values = ts[mask], values[mask]
    if ts.size < 2:
        raise ValueError("need at least two trace points past t_min")
    if np.any(values <= 0.0):
        return -np.inf
    grid = np.geomspace(ts[0], ts[-1], samples)
    idx = np.searchsorted(ts, grid, side="right") - 1
    gv = values[np.clip(idx, 0, len(values) - 1)]
    A = np.vstack([np.log(grid), np.ones_like(grid)]).T
    slope, _ = np.linalg.lstsq(A, np.log(gv), rcond=None)[0]
    return float(slope)
