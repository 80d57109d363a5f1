"""Piecewise-linear models in abs-linear form.

The data (Z, M, L, a, b, babs, c, d) with M, L strictly lower triangular
represents the function

    z_i(dx) = c_i + Z_i dx + sum_{j<i} (M_ij z_j + L_ij |z_j|)
    value(dx) = d + a^T dx + b^T z + babs^T |z|

``babs`` carries the coefficients of |z| in the value row.  It can always be
eliminated by routing |z|-terms through one extra switching variable, so the
classical form with a plain b^T z value row is the special case babs = 0; we
keep it explicit so the switch count always equals the number of abs nodes of
the originating tape.

All values are plain numpy arrays, frozen read-only after construction; every
operation here is pure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _frozen(arr, shape) -> np.ndarray:
    out = np.array(arr, dtype=float).reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class AbsLinearForm:
    n: int
    s: int
    Z: np.ndarray      # s x n
    M: np.ndarray      # s x s, strictly lower triangular
    L: np.ndarray      # s x s, strictly lower triangular
    a: np.ndarray      # n
    b: np.ndarray      # s, value-row coefficients on z
    babs: np.ndarray   # s, value-row coefficients on |z|
    c: np.ndarray      # s
    d: float

    def __post_init__(self):
        s, n = self.s, self.n
        object.__setattr__(self, "Z", _frozen(self.Z, (s, n)))
        object.__setattr__(self, "M", _frozen(self.M, (s, s)))
        object.__setattr__(self, "L", _frozen(self.L, (s, s)))
        object.__setattr__(self, "a", _frozen(self.a, (n,)))
        object.__setattr__(self, "b", _frozen(self.b, (s,)))
        object.__setattr__(self, "babs", _frozen(self.babs, (s,)))
        object.__setattr__(self, "c", _frozen(self.c, (s,)))
        object.__setattr__(self, "d", float(self.d))


@dataclass(frozen=True)
class AffineRestriction:
    """z(dx) = R dx + r and value(dx) = g^T dx + h on one signature domain."""

    R: np.ndarray
    r: np.ndarray
    g: np.ndarray
    h: float


@dataclass(frozen=True)
class LinearConstraint:
    """a . x <= b, or a . x = b when ``equality``."""

    a: np.ndarray
    b: float
    equality: bool = False


DEFAULT_SIGNATURE_TOL = 1e-10


def eval_pl(form: AbsLinearForm, dx) -> tuple[float, np.ndarray]:
    """Evaluate the model by forward substitution; returns (value, z)."""
    dx = np.asarray(dx, dtype=float)
    z = np.empty(form.s)
    base = form.c + form.Z @ dx
    for i in range(form.s):
        z[i] = base[i] + form.M[i, :i] @ z[:i] + form.L[i, :i] @ np.abs(z[:i])
    value = form.d + form.a @ dx + form.b @ z + form.babs @ np.abs(z)
    return float(value), z


def delta_eval(form: AbsLinearForm, fbar: float, dx) -> float:
    """Model increment relative to the development value: value(dx) - fbar."""
    return eval_pl(form, dx)[0] - fbar


def signature(form: AbsLinearForm, dx, tol_z: float = DEFAULT_SIGNATURE_TOL) -> np.ndarray:
    """Sign vector of z(dx); entries within tol_z*(1+|c_i|) of zero become 0."""
    if tol_z < 0:
        raise ValueError("tol_z must be nonnegative")
    _, z = eval_pl(form, dx)
    sig = np.sign(z).astype(int)
    sig[np.abs(z) <= tol_z * (1.0 + np.abs(form.c))] = 0
    return sig


def effective_b(form: AbsLinearForm, sigma) -> np.ndarray:
    """Value-row coefficients on z once |z_i| = sigma_i z_i is substituted."""
    return form.b + np.asarray(sigma, dtype=float) * form.babs


def restrict(form: AbsLinearForm, sigma) -> AffineRestriction:
    """Affine piece of the model on the closure of the domain of ``sigma``.

    Solves the unit lower triangular system (I - M - L diag(sigma)) z = c + Z dx.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (form.s,):
        raise ValueError("sigma has wrong length")
    T = np.eye(form.s) - form.M - form.L * sigma[np.newaxis, :]
    R = np.empty((form.s, form.n))
    r = np.empty(form.s)
    for i in range(form.s):
        R[i] = form.Z[i] - T[i, :i] @ R[:i]
        r[i] = form.c[i] - T[i, :i] @ r[:i]
    bs = effective_b(form, sigma)
    g = form.a + R.T @ bs
    h = form.d + bs @ r
    return AffineRestriction(R=R, r=r, g=g, h=float(h))


def signature_constraints(form: AbsLinearForm, sigma) -> list[LinearConstraint]:
    """Linear description of the closed signature domain in dx.

    sigma_i = +1/-1 keep sigma_i*(R_i dx + r_i) >= 0; sigma_i = 0 pins the
    kink: R_i dx + r_i = 0.
    """
    sigma = np.asarray(sigma, dtype=int)
    res = restrict(form, sigma)
    out = []
    for i in range(form.s):
        if sigma[i] == 0:
            out.append(LinearConstraint(a=res.R[i].copy(), b=-float(res.r[i]), equality=True))
        else:
            # sigma_i (R_i dx + r_i) >= 0  <=>  -sigma_i R_i dx <= sigma_i r_i
            out.append(LinearConstraint(a=-sigma[i] * res.R[i], b=float(sigma[i] * res.r[i])))
    return out


def affine_substitute(form: AbsLinearForm, scale: float, shift) -> AbsLinearForm:
    """Change of variables dx = scale*v + shift; the result is a form in v."""
    if scale == 0:
        raise ValueError("scale must be nonzero")
    shift = np.asarray(shift, dtype=float)
    return AbsLinearForm(
        n=form.n,
        s=form.s,
        Z=scale * form.Z,
        M=form.M,
        L=form.L,
        a=scale * form.a,
        b=form.b,
        babs=form.babs,
        c=form.c + form.Z @ shift,
        d=form.d + form.a @ shift,
    )


_FORM_BLOCKS = ("Z", "M", "L", "a", "b", "babs", "c", "d")


def form_to_text(form: AbsLinearForm) -> str:
    """Dense text dump: header ``n s``, then one labeled row-major line per
    block Z, M, L, a, b, babs, c, d.  repr round-trips floats bit-exactly."""
    lines = [f"{form.n} {form.s}"]
    for name in _FORM_BLOCKS:
        flat = np.atleast_1d(getattr(form, name)).ravel()
        lines.append(" ".join([name] + [repr(float(v)) for v in flat]))
    return "\n".join(lines) + "\n"


def form_from_text(text: str) -> AbsLinearForm:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    n, s = (int(v) for v in lines[0].split())
    data = {}
    for ln in lines[1:]:
        parts = ln.split()
        data[parts[0]] = np.array([float(v) for v in parts[1:]])
    return AbsLinearForm(
        n=n,
        s=s,
        Z=data["Z"].reshape(s, n),
        M=data["M"].reshape(s, s),
        L=data["L"].reshape(s, s),
        a=data["a"],
        b=data["b"],
        babs=data["babs"],
        c=data["c"],
        d=float(data["d"][0]),
    )
