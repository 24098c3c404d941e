"""A fast invariant suite, runnable from the command line."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .coordinates import polytope_membership, psi
from .corpus import CORPUS, load_surface
from .delaunay import delaunay_check, ptolemy_flip
from .inversion import assemble_hessian, invert_psi
from .surface import find_isomorphism
from .triangle import corner_angles, l_of_u, mu, mu_infinity, u_of_l


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return self._asdict()


def _cosine_law(rng):
    l = rng.uniform(-5, 5, (200, 3))
    th = corner_angles(l)
    prod = np.exp(l) * th[:, [1, 0, 0]] * th[:, [2, 2, 1]]
    err = float(np.max(np.abs(prod - 1.0)))
    return err < 1e-10, f"max |e^l theta theta - 1| = {err:.3g}"


def _mu_odd_increasing(rng):
    x = np.linspace(0.0, 3.0, 31)
    worst = 0.0
    for h in (-2.0, -0.5, 0.5, 1.0):
        m = mu(h, x)
        worst = max(worst, float(np.max(np.abs(m + mu(h, -x)))))
        if np.any(np.diff(m) <= 0):
            return False, f"mu not increasing at h = {h}"
    return worst < 1e-15, f"max |mu(x) + mu(-x)| = {worst:.3g}"


def _u_round_trip(rng):
    worst = 0.0
    for h in (-1.0, 0.5):
        l = rng.uniform(-2.5, 2.5, 20)
        worst = max(worst, float(np.max(np.abs(l_of_u(h, u_of_l(h, l)) - l))))
    return worst < 1e-10, f"max round-trip error {worst:.3g}"


def _edge_bound(rng):
    ratio = mu_infinity(-4.0) / mu_infinity(-1.0)
    return abs(ratio - 0.5) < 1e-12, f"mu_inf(-4) / mu_inf(-1) = {ratio!r}"


def _torus_symmetric(rng):
    T = load_surface("punctured_torus")
    z = np.asarray(psi(T, 0.0, np.zeros(3)))
    return bool(np.allclose(z, 1.0, atol=1e-15)), f"psi = {z.tolist()}"


def _hessian(rng):
    worst_sym, worst_eig = 0.0, -np.inf
    for name in CORPUS:
        T = load_surface(name)
        for h in (-1.0, 0.0, 1.0):
            A = assemble_hessian(T, h, rng.uniform(-1, 1, T.num_edges))
            worst_sym = max(worst_sym, float(np.max(np.abs(A - A.T))))
            worst_eig = max(worst_eig, float(np.linalg.eigvalsh(A).max()))
    return worst_sym < 1e-12 and worst_eig < 0, \
        f"asymmetry {worst_sym:.3g}, largest eigenvalue {worst_eig:.3g}"


def _round_trip(rng):
    worst = 0.0
    for name in CORPUS:
        T = load_surface(name)
        l = rng.uniform(-1, 1, T.num_edges)
        for h in (-0.5, 0.5):
            res = invert_psi(T, h, psi(T, h, l))
            if not res.converged:
                return False, f"{name} h={h}: {res.status}"
            worst = max(worst, float(np.max(np.abs(res.l - l))))
    return worst < 1e-8, f"max length error {worst:.3g}"


def _membership(rng):
    T = load_surface("punctured_torus")
    inside = polytope_membership(T, 0.0, [1.0, 1.0, 1.0]).member
    outside = polytope_membership(T, 0.0, [0.0, 0.0, 0.0]).member
    return inside and not outside, f"(1,1,1) member={inside}, (0,0,0) member={outside}"


def _containment(rng):
    for name in CORPUS:
        T = load_surface(name)
        for h in (-2.0, -0.5, 0.0, 0.5):
            z = psi(T, h, rng.uniform(-2, 2, T.num_edges))
            if not polytope_membership(T, h, z).member:
                return False, f"{name} h={h}: image point outside the polytope"
    return True, "all sampled images inside"


def _delaunay(rng):
    for name in CORPUS:
        T = load_surface(name)
        l = rng.uniform(-2, 2, T.num_edges)
        verdicts = {delaunay_check(T, h, l).is_delaunay for h in (-2.0, 0.0, 2.0)}
        if len(verdicts) != 1:
            return False, f"{name}: verdict depends on h"
        if not delaunay_check(T, 0.0, np.zeros(T.num_edges)).is_delaunay:
            return False, f"{name}: zero lengths not Delaunay"
    return True, "verdicts agree across h"


def _flip_involution(rng):
    T = load_surface("sphere_4")
    l = rng.uniform(-1, 1, T.num_edges)
    T2, l2 = ptolemy_flip(*ptolemy_flip(T, l, 0), 0)
    iso = find_isomorphism(T, T2) is not None
    err = float(np.max(np.abs(l2 - l)))
    return iso and err < 1e-12, f"isomorphic={iso}, length error {err:.3g}"


CHECKS: list[tuple[str, Callable]] = [
    ("cosine_law", _cosine_law),
    ("mu_odd_increasing", _mu_odd_increasing),
    ("u_round_trip", _u_round_trip),
    ("edge_bound_scaling", _edge_bound),
    ("torus_symmetric_point", _torus_symmetric),
    ("hessian_symmetric_negative_definite", _hessian),
    ("inversion_round_trip", _round_trip),
    ("membership_examples", _membership),
    ("containment_sample", _containment),
    ("delaunay_h_independence", _delaunay),
    ("flip_involution", _flip_involution),
]


def run_selftest(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, reported as such
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, bool(passed), detail))
    return out
