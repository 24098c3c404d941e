"""Surface-level coordinates: Psi_h, Phi_h, and the image polytope P_h(T)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import OutOfRangeError
from .surface import DEFAULT_CAP, EdgePath, Triangulation, enumerate_fundamental_loops, \
    enumerate_fundamental_paths
from .triangle import corner_angles, mu, mu_infinity, x_invariants

EDGE_BOUND = "edge_bound"
PATH_BOUND = "path_bound"
LOOP_POSITIVITY = "loop_positivity"

# float margins this close to zero (relative to the magnitudes summed) are
# re-decided in extended precision when the x-invariants are known
_GUARD_RTOL = 1e-11
_MP_DPS = 60


@dataclass(frozen=True)
class CornerTable:
    theta: np.ndarray   # (F, 3): angle at corner k of triangle t
    x: np.ndarray       # (F, 3): x-invariant of the side in slot k
    side_x: np.ndarray      # (E, 2): x-invariant of edge e seen from its side s
    side_theta: np.ndarray  # (E, 2): angle facing edge e from its side s


class PsiVector(np.ndarray):
    """Per-edge coordinate values.

    Vectors returned by :func:`psi` remember the parameter ``h`` and the
    side x-invariants they were computed from, which lets membership tests
    settle near-boundary comparisons exactly. Any derived array (slices,
    arithmetic) drops that provenance.
    """

    def __new__(cls, values, h=None, side_x=None):
        obj = np.array(values, dtype=float).view(cls)
        obj.h = h
        obj.side_x = side_x
        return obj

    def __array_finalize__(self, obj):
        self.h = None
        self.side_x = None

    def __reduce__(self):
        return (PsiVector, (np.asarray(self), self.h, self.side_x))


def corner_table(T: Triangulation, l) -> CornerTable:
    l = np.asarray(l, dtype=float)
    if l.shape != (T.num_edges,):
        raise ValueError(f"expected {T.num_edges} edge lengths, got shape {l.shape}")
    theta = corner_angles(l[T.side_edges])
    x = x_invariants(theta)
    t, k = T.edge_slots[..., 0], T.edge_slots[..., 1]
    return CornerTable(theta, x, x[t, k], theta[t, k])


def psi(T: Triangulation, h: float, l) -> PsiVector:
    """Psi_h(e) = mu(h, x_side0(e)) + mu(h, x_side1(e))."""
    table = corner_table(T, l)
    m = mu(h, table.side_x)
    return PsiVector(m[:, 0] + m[:, 1], h=float(h), side_x=table.side_x)


def penner_psi(T: Triangulation, l) -> np.ndarray:
    """The h = 0 coordinate from the x-invariants directly."""
    table = corner_table(T, l)
    return table.side_x[:, 0] + table.side_x[:, 1]


def phi(T: Triangulation, h: float, l) -> np.ndarray:
    """Phi_h(e): sum over the two sides of (facing angle)^(h + 1)."""
    if h == -1:
        raise ValueError("phi is undefined at h = -1")
    table = corner_table(T, l)
    with np.errstate(over="raise"):
        try:
            vals = np.power(table.side_theta, h + 1.0)
        except FloatingPointError:
            raise OutOfRangeError("phi overflows") from None
    return vals[:, 0] + vals[:, 1]


# --- the polytope ----------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintSystem:
    paths: tuple[EdgePath, ...]
    path_counts: np.ndarray  # (P, E)
    loops: tuple[EdgePath, ...]
    loop_counts: np.ndarray  # (L, E)


def _counts(paths, E):
    out = np.zeros((len(paths), E), dtype=int)
    for i, p in enumerate(paths):
        np.add.at(out[i], list(p.edges), 1)
    return out


@lru_cache(maxsize=64)
def constraint_system(T: Triangulation, cap: int = DEFAULT_CAP) -> ConstraintSystem:
    paths = tuple(enumerate_fundamental_paths(T, cap=cap))
    loops = tuple(enumerate_fundamental_loops(T, cap=cap))
    E = T.num_edges
    return ConstraintSystem(paths, _counts(paths, E), loops, _counts(loops, E))


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: object  # edge index or EdgePath
    lhs: float
    rhs: float

    def to_dict(self) -> dict:
        w = self.witness.to_dict() if isinstance(self.witness, EdgePath) else self.witness
        return {"kind": self.kind, "witness": w, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class PolytopeReport:
    member: bool
    violations: list
    h: float
    eps: float = 0.0
    min_slack: float = float("inf")
    checked: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "h": self.h,
            "eps": self.eps,
            "min_slack": self.min_slack,
            "checked": dict(self.checked),
            "violations": [v.to_dict() for v in self.violations],
        }


def edge_bound(h: float) -> float:
    """2 * int_0^inf exp(h t^2) dt (infinite for h >= 0)."""
    return 2.0 * mu_infinity(h)


class _ExactSides:
    """High-precision side terms mu(x) = k * mu_inf + rho, with integer k.

    Near saturation (h < 0, large |x|) the value is kept as the limit plus
    a complementary-error-function remainder so nothing cancels.
    """

    def __init__(self, h, side_x):
        self.h = h
        with mpmath.workdps(_MP_DPS):
            self.k = np.zeros(side_x.shape, dtype=int)
            rho = np.empty(side_x.shape, dtype=object)
            if h == 0:
                self.M = None
                for idx, x in np.ndenumerate(side_x):
                    rho[idx] = mpmath.mpf(float(x))
            elif h > 0:
                self.M = None
                a = mpmath.sqrt(h)
                scale = mpmath.sqrt(mpmath.pi) / (2 * a)
                for idx, x in np.ndenumerate(side_x):
                    rho[idx] = scale * mpmath.erfi(a * mpmath.mpf(float(x)))
            else:
                a = mpmath.sqrt(-h)
                self.M = mpmath.sqrt(mpmath.pi) / (2 * a)
                for idx, x in np.ndenumerate(side_x):
                    x = mpmath.mpf(float(x))
                    if abs(a * x) > 1:
                        s = 1 if x > 0 else -1
                        self.k[idx] = s
                        rho[idx] = -s * self.M * mpmath.erfc(a * abs(x))
                    else:
                        rho[idx] = self.M * mpmath.erf(a * x)
        self.edge_k = self.k.sum(axis=1)
        self.edge_rho = rho[:, 0] + rho[:, 1]

    def margin(self, counts, sign, bound_multiple, h_test):
        """sign * sum(counts * z) + bound_multiple * mu_inf(h_test), exactly."""
        with mpmath.workdps(_MP_DPS):
            k = sign * int(np.dot(counts, self.edge_k))
            rho = mpmath.fsum(sign * int(c) * r for c, r in zip(counts, self.edge_rho) if c)
            if bound_multiple == 0:
                return (k * self.M if k else 0) + rho
            if h_test == self.h:
                return (k + bound_multiple) * self.M + rho
            m_test = mpmath.sqrt(mpmath.pi) / (2 * mpmath.sqrt(-h_test))
            return (k * self.M if k else 0) + rho + bound_multiple * m_test


def polytope_membership(T: Triangulation, h: float, z, eps: float = 0.0,
                        cap: int = DEFAULT_CAP) -> PolytopeReport:
    """Decide z in P_h(T) with strict inequalities.

    For h >= 0 only loop positivity is checked; for h < 0 also the per-edge
    upper bound and the lower bound along every fundamental path. A
    constraint holds when its margin exceeds ``eps``.
    """
    h = float(h)
    zf = np.asarray(z, dtype=float)
    E = T.num_edges
    if zf.shape != (E,):
        raise ValueError(f"expected {E} coordinates, got shape {zf.shape}")
    if not np.all(np.isfinite(zf)):
        raise OutOfRangeError("coordinates must be finite")
    system = constraint_system(T, cap)
    exact = None
    if isinstance(z, PsiVector) and z.side_x is not None and z.h is not None:
        exact = (z.h, z.side_x)
    sides = None

    # each family: (kind, witnesses, counts, sign, bound multiple, rhs)
    families = [(LOOP_POSITIVITY, system.loops, system.loop_counts, 1, 0, 0.0)]
    if h < 0:
        B = edge_bound(h)
        families.insert(0, (PATH_BOUND, system.paths, system.path_counts, 1, 2, -B))
        families.insert(0, (EDGE_BOUND, tuple(range(E)), np.eye(E, dtype=int), -1, 2, B))

    violations = []
    min_slack = float("inf")
    checked = {}
    absz = np.abs(zf)
    for kind, witnesses, counts, sign, mult, rhs in families:
        checked[kind] = len(witnesses)
        if not len(witnesses):
            continue
        sums = counts @ zf
        margins = sign * sums + (sign * -rhs if kind == EDGE_BOUND else -rhs)
        scale = counts @ absz + abs(rhs)
        unsure = np.abs(margins - eps) <= _GUARD_RTOL * (scale + 1e-300)
        if exact is not None and unsure.any():
            if sides is None:
                sides = _ExactSides(*exact)
            for i in np.flatnonzero(unsure):
                m = sides.margin(counts[i], sign, mult, h)
                margins[i] = float(m)
                if m > eps and margins[i] <= eps:
                    # strictly inside, below float resolution
                    margins[i] = np.nextafter(eps, np.inf)
                elif m <= eps and margins[i] > eps:
                    margins[i] = eps
        min_slack = min(min_slack, float(margins.min()))
        for i in np.flatnonzero(margins <= eps):
            violations.append(Violation(kind, witnesses[i], float(sums[i]), float(rhs)))
    return PolytopeReport(not violations, violations, h, eps, min_slack, checked)


def psi_signs(z: PsiVector) -> np.ndarray:
    """Signs of the entries of a computed coordinate vector.

    Entries that cancel to within rounding of their two side terms are
    re-evaluated from the stored x-invariants in extended precision.
    """
    zf = np.asarray(z, dtype=float)
    signs = np.sign(zf).astype(int)
    side_x, h = getattr(z, "side_x", None), getattr(z, "h", None)
    if side_x is None or h is None:
        return signs
    sides = np.abs(mu(h, side_x)).sum(axis=1)
    unsure = np.flatnonzero(np.abs(zf) <= _GUARD_RTOL * sides)
    if unsure.size:
        exact = _ExactSides(h, side_x)
        eye = np.eye(zf.size, dtype=int)
        for e in unsure:
            m = exact.margin(eye[e], 1, 0, h)
            signs[e] = 1 if m > 0 else (-1 if m < 0 else 0)
    return signs


def mu_sum(h: float, a, b) -> np.ndarray:
    """mu(h, a) + mu(h, b) elementwise, accurate even when the terms cancel.

    The float sum is kept where it is reliable; elsewhere (saturated tails
    for h < 0, near-opposite arguments) it is recomputed in extended
    precision and rounded once.
    """
    h = float(h)
    side_x = np.stack(np.broadcast_arrays(np.asarray(a, dtype=float),
                                          np.asarray(b, dtype=float)), axis=-1)
    flat = side_x.reshape(-1, 2)
    m = mu(h, flat)
    out = m[:, 0] + m[:, 1]
    unsure = np.flatnonzero(np.abs(out) <= _GUARD_RTOL * np.abs(m).sum(axis=1))
    if unsure.size:
        exact = _ExactSides(h, flat[unsure])
        eye = np.eye(unsure.size, dtype=int)
        for i, idx in enumerate(unsure):
            out[idx] = float(exact.margin(eye[i], 1, 0, h))
    return out.reshape(side_x.shape[:-1])


# --- probing the boundary -----------------------------------------------------------

@dataclass(frozen=True)
class ProbePoint:
    scale: float
    z: np.ndarray
    min_slack: float
    member: bool

    def to_dict(self) -> dict:
        return {"scale": self.scale, "z": list(map(float, self.z)),
                "min_slack": self.min_slack, "member": self.member}


@dataclass(frozen=True)
class ProbeResult:
    points: list
    stopped: str | None = None

    def to_dict(self) -> dict:
        return {"points": [p.to_dict() for p in self.points], "stopped": self.stopped}


def boundary_probe(T: Triangulation, h: float, l0, direction, steps: int,
                   step: float = 0.5) -> ProbeResult:
    """Evaluate Psi_h along l0 + s * direction for s = 0, step, 2 step, ...

    Stops early, recording why, once the lengths leave the representable
    range.
    """
    l0 = np.asarray(l0, dtype=float)
    d = np.asarray(direction, dtype=float)
    if not np.any(d):
        raise ValueError("direction must be nonzero")
    points = []
    for k in range(steps + 1):
        s = k * step
        try:
            z = psi(T, h, l0 + s * d)
        except OutOfRangeError as exc:
            return ProbeResult(points, f"stopped at scale {s}: {exc}")
        rep = polytope_membership(T, h, z)
        points.append(ProbePoint(s, np.asarray(z), rep.min_slack, rep.member))
    return ProbeResult(points)
