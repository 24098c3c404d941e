"""Recover edge lengths from a target coordinate vector by damped Newton ascent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .coordinates import psi, polytope_membership
from .errors import DomainError, LinearSolveError, NotInPolytopeError, OutOfRangeError
from .surface import Triangulation
from .triangle import _u_or_limit, l_of_u, mu_inverse, triangle_hessian, u_min, u_of_l, u_prime


_POLISH_STEPS = 2
_MIN_ALPHA = 1e-12
_EXPAND_SLOPE = 0.1


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 200
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_l: np.ndarray | None = None
    check_membership: bool = True
    # largest change of any edge length in one step
    max_step: float = 2.0
    monotone_residual: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.armijo_c < 0.5:
            raise ValueError("armijo_c must lie in (0, 1/2)")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class SolveResult:
    l: np.ndarray
    residual: float
    iterations: int
    converged: bool
    status: str = "converged"
    # per accepted step: (sup-norm residual, 2-norm residual, step size)
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "l": [float(v) for v in self.l],
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "status": self.status,
            "trace": [{"residual": r, "residual_2": r2, "step": s} for r, r2, s in self.trace],
        }


def assemble_hessian(T: Triangulation, h: float, l) -> np.ndarray:
    """Jacobian of psi with respect to the u-coordinates of the edges."""
    l = np.asarray(l, dtype=float)
    E = T.num_edges
    A = np.zeros((E, E))
    for t, edges in enumerate(T.side_edges):
        H = triangle_hessian(h, l[edges]).H
        np.add.at(A, (edges[:, None], edges[None, :]), H)
    return 0.5 * (A + A.T)


def _newton_step(A, g):
    """Solve A s = -g for negative definite A, after symmetric equilibration."""
    d = np.sqrt(np.abs(np.diag(A)))
    if not np.all(np.isfinite(A)) or np.any(d == 0):
        raise LinearSolveError("Hessian is not finite or has a zero diagonal")
    B = -A / d[:, None] / d[None, :]
    try:
        factor = scipy.linalg.cho_factor(B, check_finite=False)
    except np.linalg.LinAlgError:
        raise LinearSolveError("Hessian is not numerically negative definite") from None
    return scipy.linalg.cho_solve(factor, g / d, check_finite=False) / d


def invert_psi(T: Triangulation, h: float, z, opts: SolveOptions | None = None) -> SolveResult:
    """Find l with psi(T, h, l) = z.

    Maximizes the strictly concave energy whose gradient in u-coordinates
    is psi - z. Accepted steps satisfy a trapezoid form of the Armijo
    condition, which only needs gradients; with ``monotone_residual`` they
    must also not increase the 2-norm of the residual.
    """
    opts = opts or SolveOptions()
    h = float(h)
    E = T.num_edges
    zf = np.asarray(z, dtype=float)
    if zf.shape != (E,):
        raise ValueError(f"expected {E} coordinates, got shape {zf.shape}")
    if opts.check_membership:
        report = polytope_membership(T, h, z)
        if not report.member:
            raise NotInPolytopeError(f"target is not in the image polytope for h = {h}",
                                     report=report)

    warm = 0
    if opts.initial_l is not None:
        l = np.array(opts.initial_l, dtype=float)
    elif h != 0:
        l, warm = _warm_start(T, h, zf)
    else:
        l = np.zeros(E)
    u = u_of_l(h, l)
    g = np.asarray(psi(T, h, l)) - zf
    res = float(np.max(np.abs(g)))
    # entries above 1 in size (h > 0) are matched to relative accuracy, the
    # absolute target being below their rounding level
    scale = np.maximum(1.0, np.abs(zf))

    def matched(g):
        return bool(np.all(np.abs(g) <= opts.tol * scale))

    trace = []
    lower = u_min(h)
    polish = 0
    for it in range(warm, opts.max_iter):
        if matched(g):
            # a couple of extra steps push the residual to rounding level
            if polish >= _POLISH_STEPS:
                return SolveResult(l, res, it, True, "converged", trace)
            polish += 1
        A = assemble_hessian(T, h, l)
        s = _newton_step(A, g)
        slope = float(g @ s)  # > 0: s is an ascent direction
        limit = _step_limit(h, l, u, s, lower, opts.max_step)
        alpha0 = min(1.0, limit)
        alpha = alpha0
        gnorm = float(np.linalg.norm(g))
        dl = s / u_prime(h, l)
        while True:
            try:
                u_new = u + alpha * s
                l_new = l_of_u(h, u_new, guess=l + alpha * dl)
                g_new = np.asarray(psi(T, h, l_new)) - zf
                ok = (float(g_new @ s) >= -(1.0 - 2.0 * opts.armijo_c) * slope
                      and (not opts.monotone_residual or np.linalg.norm(g_new) <= gnorm))
            except OutOfRangeError:
                ok = False
            if ok:
                break
            alpha *= opts.backtrack_factor
            if alpha < _MIN_ALPHA * alpha0:
                break
        if alpha < _MIN_ALPHA * alpha0:
            if matched(g):
                return SolveResult(l, res, it, True, "converged", trace)
            return SolveResult(l, res, it, False, "line_search_failure", trace)
        if alpha == 1.0 and float(g_new @ s) > _EXPAND_SLOPE * slope:
            # still climbing steeply: the quadratic model undershoots, which
            # happens for h > 0 where psi grows like exp(h x^2)
            alpha, u_new, l_new, g_new = _expand(T, h, zf, u, l, s, slope,
                                                 (alpha, u_new, l_new, g_new), limit, opts)
        stalled = np.all(np.abs(l_new - l) <= 1e-13 * (1.0 + np.abs(l)))
        u, l, g = u_new, l_new, g_new
        res = float(np.max(np.abs(g)))
        trace.append((res, float(np.linalg.norm(g)), alpha))
        if stalled and not matched(g):
            return SolveResult(l, res, it + 1, False, "precision_limit", trace)
    if matched(g):
        return SolveResult(l, res, opts.max_iter, True, "converged", trace)
    return SolveResult(l, res, opts.max_iter, False, "max_iter_exceeded", trace)


def _expand(T, h, z, u, l, s, slope, accepted, limit, opts):
    """Double a full step while the objective keeps rising along s.

    ``accepted`` is the (alpha, u, l, g) of the full step already taken.
    """
    best = accepted
    while 2.0 * best[0] <= limit:
        alpha = 2.0 * best[0]
        try:
            u_t = u + alpha * s
            l_t = l_of_u(h, u_t, guess=2.0 * best[2] - l)
            g_t = np.asarray(psi(T, h, l_t)) - z
        except OutOfRangeError:
            break
        dslope = float(g_t @ s)
        if (dslope < -(1.0 - 2.0 * opts.armijo_c) * slope
                or (opts.monotone_residual and np.linalg.norm(g_t) > np.linalg.norm(best[3]))):
            break
        best = (alpha, u_t, l_t, g_t)
        if dslope <= _EXPAND_SLOPE * slope:
            break
    return best


def _warm_start(T: Triangulation, h: float, z: np.ndarray) -> tuple[np.ndarray, int]:
    """Starting lengths from the h = 0 problem, and the iterations it took.

    Each edge value is split evenly between its two sides and mapped back
    through mu; the resulting h = 0 target is solved first, which is cheap
    because that map is only mildly nonlinear.
    """
    E = T.num_edges
    try:
        z0 = 2.0 * mu_inverse(h, 0.5 * z)
        if not polytope_membership(T, 0.0, z0).member:
            return np.zeros(E), 0
        res = invert_psi(T, 0.0, z0, SolveOptions(tol=1e-6, max_iter=30, check_membership=False))
    except (OutOfRangeError, DomainError, LinearSolveError):
        return np.zeros(E), 0
    if not res.converged:
        return np.zeros(E), 0
    return res.l, res.iterations


def _step_limit(h, l, u, s, lower, max_step) -> float:
    """Largest alpha keeping every length within max_step and u inside its domain."""
    # far from the solution the Hessian nearly degenerates for h < 0, and
    # grows doubly exponentially for h > 0, so raw Newton steps overshoot
    with np.errstate(over="ignore"):
        reach = np.where(s > 0, u_of_l(h, l + max_step) - u,
                         u - _u_or_limit(h, l - max_step))
    if np.isfinite(lower):
        reach = np.where(s < 0, np.minimum(reach, 0.99 * (u - lower)), reach)
    with np.errstate(divide="ignore"):
        return float(np.min(reach / np.abs(s)))

