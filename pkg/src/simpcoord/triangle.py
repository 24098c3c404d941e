"""Analytics of one decorated ideal triangle.

Lengths ``l`` are generalized (Penner) edge lengths, angles ``theta`` are
horocyclic arc lengths, ``theta[i]`` facing edge ``i``. Functions accept a
trailing axis of size 3 and broadcast over leading axes.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError, OutOfRangeError
from .quadrature import integrate

# exp() arguments beyond this are treated as overflow
EXP_LIMIT = 700.0
# below this length every decorated triangle overflows anyway
L_FLOOR = -1400.0
QUAD_RTOL = 1e-13


def _exp_checked(arg, what):
    arg = np.asarray(arg, dtype=float)
    if np.any(arg > EXP_LIMIT) or np.any(np.isnan(arg)):
        raise OutOfRangeError(f"{what} out of floating-point range")
    return np.exp(arg)


def _ret(values, like):
    return float(values) if np.ndim(like) == 0 else values


# --- cosine law ------------------------------------------------------------------

def corner_angles(l) -> np.ndarray:
    """Generalized angles from edge lengths: theta_i = exp((l_i - l_j - l_k) / 2)."""
    l = np.asarray(l, dtype=float)
    if not np.all(np.isfinite(l)):
        raise OutOfRangeError("edge lengths must be finite")
    total = l.sum(axis=-1, keepdims=True)
    return _exp_checked(l - 0.5 * total, "corner angle")


def x_invariants(theta) -> np.ndarray:
    """x_i = (theta_j + theta_k - theta_i) / 2, attached to edge i."""
    theta = np.asarray(theta, dtype=float)
    return 0.5 * theta.sum(axis=-1, keepdims=True) - theta


def lengths_from_angles(theta) -> np.ndarray:
    """Inverse cosine law: e^{l_i} = 1 / (theta_j theta_k)."""
    logt = np.log(np.asarray(theta, dtype=float))
    return logt - logt.sum(axis=-1, keepdims=True)


# --- mu(h, x) = int_0^x exp(h t^2) dt ------------------------------------------------

def mu_prime(h: float, x):
    return np.exp(h * np.square(x))


@lru_cache(maxsize=256)
def tail_cutoff(h: float) -> float:
    """For h < 0, a point T with exp(h T^2) / (-2 h T) < 1e-16."""
    if h >= 0:
        raise ValueError("tail cutoff only exists for h < 0")
    # iterate on s = sqrt(-h) T in logs, so subnormal h cannot overflow
    root = np.sqrt(-h)
    bias = np.log(1e16) - np.log(2.0 * root)

    def log_excess(s):
        return bias - s * s - np.log(s)

    s = 6.0
    for _ in range(100):
        s = np.sqrt(max(bias - np.log(s), 1.0))
    while log_excess(s) >= 0:
        s *= 1.01
    return float(s / root)


@lru_cache(maxsize=256)
def mu_infinity(h: float) -> float:
    """int_0^inf exp(h t^2) dt; +inf for h >= 0."""
    if h >= 0:
        return float("inf")
    return float(integrate(lambda t: np.exp(h * t * t), 0.0, tail_cutoff(h), rtol=QUAD_RTOL))


def mu(h: float, x):
    """int_0^x exp(h t^2) dt, elementwise in ``x``.

    For h < 0 the argument may be infinite; beyond the tail cutoff the
    value is the limit mu_infinity(h).
    """
    h = float(h)
    xs = np.asarray(x, dtype=float)
    if np.any(np.isnan(xs)):
        raise OutOfRangeError("mu of nan")
    if h == 0.0:
        return _ret(xs.copy(), x)
    ax = np.abs(xs)
    if h < 0:
        ax = np.minimum(ax, tail_cutoff(h))
    else:
        if np.any(ax > np.sqrt(EXP_LIMIT / h)):
            raise OutOfRangeError(f"mu({h}, x) overflows for |x| = {ax.max():.6g}")
    vals = integrate(lambda t: np.exp(h * t * t), 0.0, ax, rtol=QUAD_RTOL)
    if h < 0:
        # rounding must not push a value past the supremum
        vals = np.minimum(vals, mu_infinity(h))
    return _ret(np.copysign(vals, xs), x)


def mu_inverse(h: float, y, max_iter: int = 200):
    """The x with mu(h, x) = y.

    For h < 0, |y| must stay below mu_infinity(h); for h > 0 the answer
    must stay in the representable range of mu.
    """
    h = float(h)
    ys = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(ys)):
        raise DomainError("mu_inverse needs finite values")
    if h == 0.0:
        return _ret(ys.copy(), y)
    target = np.abs(ys).ravel()
    # mu(x) <= x for h < 0 and mu(x) >= x for h > 0
    if h < 0:
        if np.any(target >= mu_infinity(h)):
            raise DomainError(f"|y| must be below mu_infinity({h})")
        lo, hi = target.copy(), np.full_like(target, tail_cutoff(h))
    else:
        lo, hi = np.zeros_like(target), np.minimum(target, np.sqrt(EXP_LIMIT / h) * (1 - 1e-12))
        if np.any(mu(h, hi) < target):
            raise OutOfRangeError(f"mu_inverse({h}, y) out of floating-point range")
    # mu is concave for h < 0, so Newton from the left end never overshoots
    x = lo.copy() if h < 0 else 0.5 * (lo + hi)
    eps = np.finfo(float).eps
    positive = target > 0
    last = np.full_like(x, np.inf)
    for _ in range(max_iter):
        m = mu(h, x)
        F = m - target
        hi = np.where(F > 0, x, hi)
        lo = np.where(F < 0, x, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            if h > 0:
                # log mu is close to quadratic in x, which Newton handles well
                cand = np.where(positive & (m > 0),
                                x - np.log(m / np.where(positive, target, 1.0)) * m / mu_prime(h, x),
                                0.0)
            else:
                cand = x - F / mu_prime(h, x)
        # Newton must stay in the bracket and halve the previous step, except
        # left of the root for h < 0 where concavity prevents overshoot
        ok = (cand >= lo) & (cand <= hi) & ((np.abs(cand - x) <= 0.5 * last) | ((h < 0) & (F < 0)))
        new = np.where(ok, cand, 0.5 * (lo + hi))
        new = np.where(F == 0, x, new)
        step = np.abs(new - x)
        last = step
        x = new
        if np.all((step <= 2 * eps * np.maximum(1.0, x)) | (hi - lo <= 4 * eps * np.maximum(1.0, x))):
            return _ret(np.copysign(x, ys.ravel()).reshape(ys.shape), y)
    raise OutOfRangeError("mu_inverse did not converge")


# --- u(h, l) = int_0^l exp(-h e^{-t}) dt -------------------------------------------------

def u_prime(h: float, l):
    return np.exp(-h * np.exp(-np.asarray(l, dtype=float)))


def _u_integrand(h):
    return lambda t: np.exp(-h * np.exp(-t))


def u_of_l(h: float, l):
    """The concavity coordinate u(l); strictly increasing, u(0) = 0."""
    h = float(h)
    ls = np.asarray(l, dtype=float)
    if not np.all(np.isfinite(ls)):
        raise OutOfRangeError("edge lengths must be finite")
    if h == 0.0:
        return _ret(ls.copy(), l)
    if h < 0 and np.any(-h * np.exp(-np.minimum(ls, 0.0)) > EXP_LIMIT):
        raise OutOfRangeError(f"u({h}, l) overflows for l = {ls.min():.6g}")
    return _ret(integrate(_u_integrand(h), 0.0, ls, rtol=QUAD_RTOL), l)


@lru_cache(maxsize=256)
def u_min(h: float) -> float:
    """Infimum of u(h, .): finite for h > 0, -inf otherwise."""
    if h <= 0:
        return float("-inf")
    # the integrand is below 1e-300 left of this point
    left = np.log(h) - np.log(800.0)
    with np.errstate(over="ignore"):  # exp(-t) overflows harmlessly for tiny h
        return float(integrate(_u_integrand(h), 0.0, left, rtol=QUAD_RTOL))


def _u_or_limit(h, ls):
    """u(h, l) with the out-of-range region replaced by its limit."""
    out = np.empty_like(ls)
    if h < 0:
        with np.errstate(over="ignore"):
            bad = -h * np.exp(-np.minimum(ls, 0.0)) > EXP_LIMIT
        fill = -np.inf
    else:
        bad = ls < L_FLOOR
        fill = u_min(h)
    out[bad] = fill
    if np.any(~bad):
        out[~bad] = integrate(_u_integrand(h), 0.0, ls[~bad], rtol=QUAD_RTOL)
    return out


def l_of_u(h: float, u, guess=None, max_iter: int = 200):
    """Invert u_of_l by bracketed Newton iteration (bisection fallback)."""
    h = float(h)
    us = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(us)):
        raise DomainError("u must be finite")
    if h == 0.0:
        return _ret(us.copy(), u)
    umin = u_min(h)
    if np.any(us <= umin):
        raise DomainError(f"u must exceed u_min({h}) = {umin!r}")
    flat = us.ravel()
    # u' >= 1 for h < 0 and u' <= 1 for h > 0 pins the root between 0 and u
    if h < 0:
        floor = -np.log(EXP_LIMIT / -h)
        lo = np.where(flat < 0, np.maximum(flat, floor), 0.0)
        hi = np.where(flat < 0, 0.0, flat)
    else:
        lo = np.where(flat < 0, -np.inf, flat)
        hi = np.where(flat < 0, flat, np.inf)
    if guess is None:
        l = np.where(np.isfinite(lo) & np.isfinite(hi), 0.5 * (lo + hi), flat)
    else:
        l = np.clip(np.array(np.broadcast_to(guess, us.shape), dtype=float).ravel(), lo, hi)
    last_step = np.full_like(flat, np.inf)
    done = np.zeros(flat.shape, dtype=bool)
    eps = np.finfo(float).eps
    for _ in range(max_iter):
        F = _u_or_limit(h, l) - flat
        hi = np.where(F > 0, np.minimum(hi, l), hi)
        lo = np.where(F < 0, np.maximum(lo, l), lo)
        done |= F == 0
        bracketed = np.isfinite(lo) & np.isfinite(hi)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            cand = l - F / u_prime(h, l)
            fallback = np.where(
                bracketed, 0.5 * (lo + hi),
                np.where(np.isfinite(lo), lo + np.maximum(1.0, np.abs(lo)),
                         hi - np.maximum(1.0, np.abs(hi))))
            # Newton must land inside the bracket and at least halve the step
            ok = (np.isfinite(cand) & (cand >= lo) & (cand <= hi)
                  & (~bracketed | (np.abs(cand - l) <= 0.5 * last_step)))
        new = np.where(done, l, np.where(ok, cand, fallback))
        last_step = np.where(bracketed, np.abs(new - l), np.inf)
        small = np.abs(new - l) <= 2 * eps * np.maximum(1.0, np.abs(l))
        narrow = (hi - lo) <= 4 * eps * np.maximum(1.0, np.abs(l))
        l = new
        done |= small | narrow
        if done.all():
            if np.any(l < L_FLOOR + 1.0):
                raise OutOfRangeError("u corresponds to an edge length below the representable range")
            return _ret(l.reshape(us.shape), u)
    raise OutOfRangeError("l_of_u did not converge")


# --- derivatives of the per-triangle energy -----------------------------------------------

class TriangleHessian(NamedTuple):
    H: np.ndarray
    c: float
    D: np.ndarray
    M: np.ndarray


def triangle_gradient(h: float, l) -> np.ndarray:
    """Partial derivatives of the triangle energy in u: mu(h, x_i)."""
    return mu(h, x_invariants(corner_angles(l)))


def coupling_matrix(x) -> np.ndarray:
    """M with diagonal -(x_1+x_2+x_3) and (i, j) entry x_k."""
    x = np.asarray(x, dtype=float)
    s = x.sum()
    return np.array([
        [-s, x[2], x[1]],
        [x[2], -s, x[0]],
        [x[1], x[0], -s],
    ])


def triangle_hessian(h: float, l) -> TriangleHessian:
    """Jacobian d mu(x_i) / d u_j of one triangle, with its c D M D factors.

    ``H`` is assembled from the chain rule, entry by entry:
    ``mu'(x_i) * (dx_i/dl_j) / u'(l_j)`` with ``dx/dl = M / 2`` and
    ``e^{-l_j}`` equal to the product of the two angles other than theta_j.
    """
    h = float(h)
    theta = corner_angles(l)
    x = x_invariants(theta)
    M = coupling_matrix(x)
    others = np.array([theta[1] * theta[2], theta[0] * theta[2], theta[0] * theta[1]])
    expo = h * (np.square(x)[:, None] + others[None, :])
    H = 0.5 * M * _exp_checked(expo, "triangle Hessian entry")
    with np.errstate(over="ignore", under="ignore"):
        c = 0.5 * np.exp(h * (np.square(theta).sum() / 4.0 - others.sum() / 2.0))
        D = np.exp(h * others)
    return TriangleHessian(H, float(c), D, M)


def mixed_partial_residual(l, dmu, du) -> float:
    """Largest relative asymmetry of dmu(x_i) / du(l_j) over i != j.

    The 1-form sum_i mu(x_i) d u(l_i) is closed exactly when this matrix is
    symmetric, so the residual vanishes for the (mu, u) pair used here.
    """
    x = x_invariants(corner_angles(l))
    l = np.asarray(l, dtype=float)
    A = np.asarray(dmu(x), dtype=float)[:, None] / np.asarray(du(l), dtype=float)[None, :]
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            scale = max(abs(A[i, j]), abs(A[j, i]))
            if scale > 0:
                worst = max(worst, abs(A[i, j] - A[j, i]) / scale)
    return worst
