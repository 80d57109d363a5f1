"""Feasible sets as one dense constraint system.

A polyhedron keeps equalities, inequalities, and box bounds separate so the
LP core can treat bounds natively; intersecting with extra constraints just
concatenates rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .plmodel import LinearConstraint

DEFAULT_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class Polyhedron:
    """{x : Aeq x = beq, Ain x <= bin, lo <= x <= hi}; bounds may be +-inf."""

    Aeq: np.ndarray
    beq: np.ndarray
    Ain: np.ndarray
    bin: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        n = len(self.lo)
        object.__setattr__(self, "Aeq", np.asarray(self.Aeq, dtype=float).reshape(-1, n))
        object.__setattr__(self, "beq", np.asarray(self.beq, dtype=float).ravel())
        object.__setattr__(self, "Ain", np.asarray(self.Ain, dtype=float).reshape(-1, n))
        object.__setattr__(self, "bin", np.asarray(self.bin, dtype=float).ravel())
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).ravel())
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).ravel())
        if self.Aeq.shape[0] != self.beq.shape[0] or self.Ain.shape[0] != self.bin.shape[0]:
            raise ValueError("row dimensions inconsistent")
        if np.any(self.lo > self.hi):
            raise ValueError("lo must not exceed hi")
        for arr in ("Aeq", "beq", "Ain", "bin", "lo", "hi"):
            getattr(self, arr).setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def is_boxed(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))


def box(lo, hi) -> Polyhedron:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    return Polyhedron(
        Aeq=np.zeros((0, n)), beq=np.zeros(0),
        Ain=np.zeros((0, n)), bin=np.zeros(0),
        lo=lo, hi=hi,
    )


def cube(n: int, radius: float) -> Polyhedron:
    """Symmetric box |x_i| <= radius."""
    return box(-radius * np.ones(n), radius * np.ones(n))


def contains(P: Polyhedron, x, tol: float = DEFAULT_FEAS_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (P.dim,):
        raise ValueError("dimension mismatch")
    if P.Aeq.shape[0] and np.max(np.abs(P.Aeq @ x - P.beq)) > tol:
        return False
    if P.Ain.shape[0] and np.max(P.Ain @ x - P.bin) > tol:
        return False
    return bool(np.all(x >= P.lo - tol) and np.all(x <= P.hi + tol))


def intersect(P: Polyhedron, constraints: Iterable[LinearConstraint]) -> Polyhedron:
    """Concatenate extra rows onto P; no simplification is performed."""
    cons = list(constraints)
    if not cons:
        return P
    eqs = [c for c in cons if c.equality]
    ins = [c for c in cons if not c.equality]
    Aeq = np.vstack([P.Aeq] + [c.a.reshape(1, -1) for c in eqs]) if eqs else P.Aeq
    beq = np.concatenate([P.beq, np.array([c.b for c in eqs])]) if eqs else P.beq
    Ain = np.vstack([P.Ain] + [c.a.reshape(1, -1) for c in ins]) if ins else P.Ain
    bin_ = np.concatenate([P.bin, np.array([c.b for c in ins])]) if ins else P.bin
    return Polyhedron(Aeq=Aeq, beq=beq, Ain=Ain, bin=bin_, lo=P.lo, hi=P.hi)
