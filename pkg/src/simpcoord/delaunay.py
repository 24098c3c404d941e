"""Delaunay test by coordinate signs, Ptolemy flips, and greedy flipping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .coordinates import psi, psi_signs
from .errors import FlipError
from .surface import Triangulation, flip_combinatorial, flip_quadrilateral, surface_document


class EdgeVerdict(NamedTuple):
    edge: int
    x_side0: float
    x_side1: float
    psi: float
    sign: int


@dataclass(frozen=True)
class DelaunayVerdict:
    is_delaunay: bool
    per_edge: list
    h: float

    @property
    def bad_edges(self) -> list[int]:
        return [v.edge for v in self.per_edge if v.sign <= 0]

    def to_dict(self) -> dict:
        return {
            "is_delaunay": self.is_delaunay,
            "h": self.h,
            "per_edge": [v._asdict() for v in self.per_edge],
        }


def delaunay_check(T: Triangulation, h: float, l) -> DelaunayVerdict:
    """Delaunay iff every edge coordinate is strictly positive."""
    z = psi(T, h, l)
    signs = psi_signs(z)
    per_edge = [EdgeVerdict(e, float(z.side_x[e, 0]), float(z.side_x[e, 1]),
                            float(z[e]), int(signs[e]))
                for e in range(T.num_edges)]
    return DelaunayVerdict(bool(np.all(signs > 0)), per_edge, float(h))


def ptolemy_flip(T: Triangulation, l, e: int) -> tuple[Triangulation, np.ndarray]:
    """Flip edge ``e`` and give the new diagonal its Ptolemy length.

    With lambda = exp(l / 2) the new diagonal has
    lambda' = (lambda_a lambda_c + lambda_b lambda_d) / lambda_e.
    """
    l = np.asarray(l, dtype=float)
    a, b, c, d = flip_quadrilateral(T, e)
    new = l.copy()
    new[e] = 2.0 * np.logaddexp(0.5 * (l[a] + l[c]), 0.5 * (l[b] + l[d])) - l[e]
    return flip_combinatorial(T, e), new


@dataclass(frozen=True)
class FlipRecord:
    flips: list  # (edge, new length)
    triangulation: Triangulation
    lengths: np.ndarray
    is_delaunay: bool
    status: str = "delaunay"
    verdict: DelaunayVerdict | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "is_delaunay": self.is_delaunay,
            "num_flips": len(self.flips),
            "flips": [{"edge": e, "new_length": v} for e, v in self.flips],
            "lengths": [float(v) for v in self.lengths],
            "surface": surface_document(self.triangulation),
        }


def flip_to_delaunay(T: Triangulation, h: float, l, max_flips: int | None = None) -> FlipRecord:
    """Flip non-Delaunay edges, lowest index first, until none remain.

    Stops with status ``max_flips_exceeded`` (partial record) when the flip
    budget, 10 E^2 by default, runs out, and ``no_admissible_flip`` if every
    offending edge is the diagonal of a degenerate quadrilateral.
    """
    if max_flips is None:
        max_flips = 10 * T.num_edges ** 2
    l = np.array(l, dtype=float)
    flips = []
    while True:
        verdict = delaunay_check(T, h, l)
        if verdict.is_delaunay:
            return FlipRecord(flips, T, l, True, "delaunay", verdict)
        if len(flips) >= max_flips:
            return FlipRecord(flips, T, l, False, "max_flips_exceeded", verdict)
        for e in verdict.bad_edges:
            try:
                T, l = ptolemy_flip(T, l, e)
            except FlipError:
                continue
            flips.append((e, float(l[e])))
            break
        else:
            return FlipRecord(flips, T, l, False, "no_admissible_flip", verdict)
