"""Command-line entry point.

Every subcommand writes one JSON report (to stdout or ``--out``). Exit
status is 0 on success, 1 when the computation answers "no" or raises a
domain error, and 2 for unreadable or malformed input files.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import report
from .coordinates import boundary_probe, phi, polytope_membership, psi
from .corpus import load_surface
from .delaunay import delaunay_check, flip_to_delaunay
from .errors import MetricFormatError, NotInPolytopeError, SimpCoordError, SurfaceFormatError
from .inversion import SolveOptions, invert_psi
from .selftest import run_selftest
from .surface import enumerate_fundamental_loops, enumerate_fundamental_paths

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2
_NEGATIVE = re.compile(r"^-(\d|\.\d|inf|nan)", re.IGNORECASE)


class InputError(Exception):
    code = "io_error"


def _vector(text: str, flag: str, key: str = "lengths"):
    """Parse an inline comma list, or a JSON file holding a list or a metric document.

    Returns (values, surface named in the document or None).
    """
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise InputError(f"cannot read {flag} file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise MetricFormatError(f"{flag}: malformed JSON: {exc}") from None
        surface = None
        if isinstance(doc, dict):
            surface = doc.get("surface")
            doc = doc.get(key, doc.get("lengths"))
        if not isinstance(doc, list):
            raise MetricFormatError(f"{flag}: expected a list of numbers")
        values = doc
    else:
        surface = None
        values = [v for v in text.split(",") if v.strip()]
    try:
        out = np.array([float(v) for v in values], dtype=float)
    except (TypeError, ValueError):
        raise MetricFormatError(f"{flag}: entries must be numbers") from None
    if not np.all(np.isfinite(out)):
        raise MetricFormatError(f"{flag}: entries must be finite")
    return out, surface


def _surface(args, hint=None):
    name = args.surface or hint
    if name is None:
        raise InputError("no surface given (use --surface)")
    try:
        return load_surface(name)
    except OSError as exc:
        raise InputError(f"cannot read surface: {exc}") from None


def _sized(vec, T, flag):
    if vec.shape != (T.num_edges,):
        raise MetricFormatError(f"{flag}: expected {T.num_edges} values, got {vec.size}")
    return vec


def _lengths(args, T=None):
    if args.lengths is None:
        T = T or _surface(args)
        return T, np.zeros(T.num_edges)
    vec, hint = _vector(args.lengths, "--lengths")
    T = T or _surface(args, hint)
    return T, _sized(vec, T, "--lengths")


# --- subcommands: each returns (payload, exit status) -----------------------------

def cmd_psi(args):
    T, l = _lengths(args)
    z = psi(T, args.h, l)
    return {"lengths": l, "z": np.asarray(z)}, EXIT_OK


def cmd_invert(args):
    if args.target is None:
        raise InputError("invert needs --target")
    vec, hint = _vector(args.target, "--target", key="z")
    T = _surface(args, hint)
    z = _sized(vec, T, "--target")
    res = invert_psi(T, args.h, z, SolveOptions(tol=args.tol, max_iter=args.max_iter))
    return {"target": z, "result": res}, EXIT_OK if res.converged else EXIT_DOMAIN


def cmd_polytope(args):
    if args.z is None:
        raise InputError("polytope needs --z")
    vec, hint = _vector(args.z, "--z", key="z")
    T = _surface(args, hint)
    rep = polytope_membership(T, args.h, _sized(vec, T, "--z"), eps=args.eps)
    return {"z": vec, "report": rep}, EXIT_OK if rep.member else EXIT_DOMAIN


def cmd_loops(args):
    T = _surface(args)
    loops = enumerate_fundamental_loops(T)
    return {"count": len(loops), "loops": loops}, EXIT_OK


def cmd_paths(args):
    T = _surface(args)
    paths = enumerate_fundamental_paths(T, dedup=args.dedup)
    return {"dedup": args.dedup, "count": len(paths), "paths": paths}, EXIT_OK


def cmd_delaunay(args):
    T, l = _lengths(args)
    return {"lengths": l, "verdict": delaunay_check(T, args.h, l)}, EXIT_OK


def cmd_flip(args):
    T, l = _lengths(args)
    rec = flip_to_delaunay(T, args.h, l, max_flips=args.max_flips)
    return {"lengths": l, "record": rec}, EXIT_OK if rec.is_delaunay else EXIT_DOMAIN


def cmd_probe_boundary(args):
    T, l0 = _lengths(args)
    if args.direction is None:
        d = -np.ones(T.num_edges)
    else:
        d = _sized(_vector(args.direction, "--direction")[0], T, "--direction")
    res = boundary_probe(T, args.h, l0, d, args.steps, args.step)
    return {"l0": l0, "direction": d, "probe": res}, EXIT_OK


def cmd_probe_phi(args):
    """Sample pairs of metrics and look for near-collisions of their Phi images.

    Pairs are a base point plus a displacement whose size is spread over
    three decades, so both global and local injectivity are exercised. The
    smallest ratio |Phi(a) - Phi(b)| / |a - b| is reported; a ratio near zero
    would be a candidate counterexample. This is evidence, not a proof.
    """
    T = _surface(args)
    rng = np.random.default_rng(args.seed)
    E = T.num_edges
    best = None
    ratios = []
    for i in range(args.samples):
        a = rng.uniform(-2.0, 2.0, E)
        v = rng.normal(size=E)
        b = a + 10.0 ** rng.uniform(-3.0, 0.0) * v / np.linalg.norm(v)
        da = float(np.linalg.norm(b - a))
        dphi = float(np.linalg.norm(phi(T, args.h, b) - phi(T, args.h, a)))
        r = dphi / da
        ratios.append(r)
        if best is None or r < best["ratio"]:
            best = {"index": i, "ratio": r, "length_distance": da,
                    "image_distance": dphi, "a": a, "b": b}
    ratios = np.array(ratios)
    summary = {
        "samples": args.samples,
        "seed": args.seed,
        "min_ratio": float(ratios.min()) if ratios.size else math.inf,
        "median_ratio": float(np.median(ratios)) if ratios.size else math.inf,
        "closest_pair": best,
        "candidate_collision": bool(ratios.size and ratios.min() < 1e-8),
    }
    return summary, EXIT_OK


def cmd_selftest(args):
    checks = run_selftest(args.seed)
    passed = all(c.passed for c in checks)
    return {"passed": passed, "checks": checks}, EXIT_OK if passed else EXIT_DOMAIN


COMMANDS = {
    "psi": (cmd_psi, "evaluate the coordinate map at given lengths"),
    "invert": (cmd_invert, "recover lengths from a target coordinate vector"),
    "polytope": (cmd_polytope, "decide membership in the image polytope"),
    "loops": (cmd_loops, "enumerate fundamental edge loops"),
    "paths": (cmd_paths, "enumerate fundamental edge paths"),
    "delaunay": (cmd_delaunay, "per-edge Delaunay verdict"),
    "flip": (cmd_flip, "flip to a Delaunay triangulation"),
    "probe-boundary": (cmd_probe_boundary, "track the tightest constraint along a ray"),
    "probe-phi": (cmd_probe_phi, "look for near-collisions of the angle-power map"),
    "selftest": (cmd_selftest, "run the built-in invariant checks"),
}


def _finite(text):
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simpcoord", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--surface", help="corpus name or surface JSON file")
        p.add_argument("--h", type=_finite, default=0.0, help="deformation parameter (default 0)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        if name in ("psi", "delaunay", "flip", "probe-boundary"):
            p.add_argument("--lengths", help="comma list or metric JSON file")
        if name == "invert":
            p.add_argument("--target", help="comma list or JSON file")
            p.add_argument("--tol", type=float, default=1e-10)
            p.add_argument("--max-iter", type=int, default=200)
        if name == "polytope":
            p.add_argument("--z", help="comma list or JSON file")
            p.add_argument("--eps", type=float, default=0.0, help="required slack")
        if name == "paths":
            p.add_argument("--dedup", action="store_true", help="one direction per path")
        if name == "flip":
            p.add_argument("--max-flips", type=int, default=None)
        if name == "probe-boundary":
            p.add_argument("--direction", help="comma list (default all -1)")
            p.add_argument("--steps", type=int, default=10)
            p.add_argument("--step", type=float, default=0.5)
        if name == "probe-phi":
            p.add_argument("--samples", type=int, default=200)
    return parser


def _attach_negative_values(argv):
    """Rewrite ``--flag -1,2`` as ``--flag=-1,2`` so argparse accepts it."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if (a.startswith("--") and "=" not in a and i + 1 < len(argv)
                and _NEGATIVE.match(argv[i + 1])):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def run(argv=None) -> tuple[int, str, str | None]:
    """Run one command; return (exit status, report text, output path)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_attach_negative_values(argv))
    doc = {"command": args.command, "h": args.h}
    if getattr(args, "surface", None):
        doc["surface"] = args.surface
    fn = COMMANDS[args.command][0]
    try:
        payload, status = fn(args)
        doc["status"] = "ok" if status == EXIT_OK else "negative"
        doc.update(payload)
    except (InputError, SurfaceFormatError, MetricFormatError) as exc:
        status = EXIT_IO
        doc["status"] = "error"
        doc["error"] = {"code": exc.code, "message": str(exc)}
    except SimpCoordError as exc:
        status = EXIT_DOMAIN
        doc["status"] = "error"
        doc["error"] = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, NotInPolytopeError) and exc.report is not None:
            doc["error"]["report"] = exc.report
    except ValueError as exc:
        status = EXIT_DOMAIN
        doc["status"] = "error"
        doc["error"] = {"code": "invalid_argument", "message": str(exc)}
    return status, report.dumps(doc), args.out


def main(argv=None) -> int:
    status, text, out = run(argv)
    if out is None:
        sys.stdout.write(text)
        return status
    try:
        Path(out).write_text(text)
    except OSError as exc:
        sys.stderr.write(f"cannot write report: {exc}\n")
        return EXIT_IO
    return status
