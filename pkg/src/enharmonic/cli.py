"""Command-line interface: ``enharmonic <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (the error class name is
printed on stderr) and 2 on a usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import grid as gridmod
from .errors import EnharmonicError, InvalidNetwork
from .gallery import GALLERY, fixture
from .harmonic import psi
from .io import dump_json, load_json, load_network, parse_number, write_text_atomic
from .jacobian import jlog_report
from .network import (DEFAULT_ENUMERATION_CAP, check_network, enumerate_compatible_orientations,
                      orientation_key, validate_network)
from .numtheory import (RationalPolynomial, field_params_from_s, quadratic_discriminant,
                        quadratic_field_params, star_energies)
from .planar import smith_diagram
from .solver import ConstraintSet, conductances_of, solve_all, solve_enharmonic
from .tiling import RectTiling, render_svg, retile_with_areas


class UsageError(Exception):
    pass


def _mapping_arg(text: str) -> dict:
    """Inline JSON object or path to a JSON file."""
    if text is None:
        return None
    p = Path(text)
    if not text.lstrip().startswith("{") and p.exists():
        return load_json(p)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"expected a JSON object or a file path, got {text!r}") from exc


def _numbers(text: str) -> list:
    return [Fraction(t.strip()) for t in text.split(",") if t.strip()]


def _load(args):
    fx = load_network(args.network)
    if not fx.u:
        raise UsageError("network file has no boundary values 'u'")
    return fx


def _energies(fx, args):
    if getattr(args, "energies", None):
        data = _mapping_arg(args.energies)
        return fx.net.edge_array({k: parse_number(v) for k, v in data.items()})
    if fx.energies is None:
        raise UsageError("no energies given (network file or --energies)")
    return fx.energies


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("ENHARMONIC_THREADS", "1")))
    except ValueError:
        return 1


def cmd_validate(args):
    fx = load_network(args.network)
    report = validate_network(fx.net)
    _emit(args, dump_json(report))
    if not report.ok:
        raise InvalidNetwork("; ".join(report.violations))


def cmd_orientations(args):
    fx = _load(args)
    check_network(fx.net)
    sigmas = sorted(enumerate_compatible_orientations(fx.net, fx.u, cap=args.cap), key=orientation_key)
    if args.count:
        _emit(args, f"{len(sigmas)}\n")
    else:
        _emit(args, dump_json([fx.net.edge_dict(s) for s in sigmas]))


def _sigma(fx, text):
    data = _mapping_arg(text)
    return fx.net.orientation({k: int(v) for k, v in data.items()})


def cmd_solve(args):
    fx = _load(args)
    check_network(fx.net)
    E = _energies(fx, args)
    if args.all:
        sols = solve_all(fx.net, fx.u, E, cap=args.cap, workers=_workers())
        _emit(args, dump_json({"solutions": sols}))
    else:
        sol = solve_enharmonic(fx.net, ConstraintSet.dirichlet(fx.net, fx.u), E, _sigma(fx, args.sigma),
                               tol=args.tol)
        _emit(args, dump_json(sol))


def cmd_psi(args):
    fx = _load(args)
    c = _mapping_arg(args.conductances)
    E = psi(fx.net, fx.u, {k: parse_number(v) for k, v in c.items()})
    _emit(args, dump_json({"energies": fx.net.edge_dict(E)}))


def cmd_conductances(args):
    fx = _load(args)
    E = _energies(fx, args)
    data = _mapping_arg(args.solution)
    h = data.get("h", data)
    c = conductances_of(fx.net, E, {k: parse_number(v) for k, v in h.items()})
    _emit(args, dump_json({"c": fx.net.edge_dict(c)}))


def cmd_jacobian(args):
    fx = _load(args)
    c = _mapping_arg(args.conductances)
    report = jlog_report(fx.net, fx.u, {k: parse_number(v) for k, v in c.items()}, step=args.step)
    _emit(args, dump_json(report))


def _diagram_text(diagram, args) -> str:
    if args.format == "svg":
        return render_svg(diagram, scale_to_unit=args.unit, labels=args.labels)
    return dump_json(diagram)


def cmd_tiling(args):
    fx = _load(args)
    if fx.embedding is None:
        raise UsageError("network file has no embedding")
    E = _energies(fx, args)
    cs = ConstraintSet.dirichlet(fx.net, fx.u)
    if args.sigma:
        sol = solve_enharmonic(fx.net, cs, E, _sigma(fx, args.sigma))
    else:
        sols = solve_all(fx.net, fx.u, E, cap=args.cap, workers=_workers())
        if not 0 <= args.index < len(sols):
            raise UsageError(f"--index must be below {len(sols)}")
        sol = sols[args.index]
    _emit(args, _diagram_text(smith_diagram(fx.embedding, sol), args))


def cmd_cartogram(args):
    tiling = RectTiling.from_json(load_json(args.tiling))
    if args.areas:
        data = _mapping_arg(args.areas)
        areas = np.array([parse_number(data[t]) for t in tiling.ids])
    else:
        areas = np.full(len(tiling.tiles), tiling.areas.sum() / len(tiling.tiles))
    _emit(args, _diagram_text(retile_with_areas(tiling, areas, cross=args.cross), args))


def cmd_fields(args):
    if args.kind == "star":
        if not args.poly or not args.anchors:
            raise UsageError("fields star needs --poly and --anchors")
        p = RationalPolynomial.from_descending(_numbers(args.poly))
        e = star_energies(p, _numbers(args.anchors))
        _emit(args, dump_json({"polynomial": str(p), "anchors": _numbers(args.anchors), "energies": list(e)}))
    else:
        if args.D is None:
            raise UsageError("fields quadratic needs --D")
        if args.s is not None:
            s = Fraction(args.s)
            ed, ee = field_params_from_s(args.D, s)
        else:
            s, ed, ee = quadratic_field_params(args.D)
        delta = quadratic_discriminant(1, 1, 1, ed, ee)
        _emit(args, dump_json({"D": args.D, "s": s, "E_d": ed, "E_e": ee, "delta": delta,
                               "delta_over_D": delta / args.D}))


def _domain(args):
    if args.domain == "square":
        return gridmod.square_domain()
    if args.domain == "diamond":
        return gridmod.diamond_domain()
    if args.domain == "disk":
        return gridmod.disk_domain(0.5, (0.5, 0.5))
    if not args.domain_file:
        raise UsageError("--domain file needs --domain-file")
    return gridmod.load_domain(args.domain_file)


def cmd_grid(args):
    domain = _domain(args)
    if args.eps_list:
        eps = [float(Fraction(x)) for x in args.eps_list.split(",")]
        report = gridmod.solve_grid_sequence(domain, args.boundary, eps, energy=args.energy,
                                             workers=_workers())
        _emit(args, dump_json(report))
        return
    if args.n is None:
        raise UsageError("grid needs --n or --eps-list")
    prob = gridmod.build_grid(domain, n=args.n, boundary=args.boundary, energy=args.energy)
    sol = gridmod.solve_grid(prob)
    try:
        pde = gridmod.grid_pde_residual(prob, sol.h)
    except EnharmonicError:
        pde = None
    _emit(args, dump_json({"eps": prob.eps, "n_vertices": prob.net.n_vertices, "n_edges": prob.net.n_edges,
                           "newton_residual": sol.residual_norm, "iterations": sol.iterations,
                           "pde_residual": pde, "h": prob.net.vertex_dict(sol.h)}))
    if args.svg:
        write_text_atomic(args.svg, render_svg(smith_diagram(prob.embedding, sol), scale_to_unit=True))


def cmd_riemann(args):
    result = gridmod.riemann_map(_domain(args), float(Fraction(args.eps)))
    _emit(args, dump_json(result.diagnostics))
    if args.svg:
        write_text_atomic(args.svg, render_svg(smith_diagram(result.problem.embedding, result.solution)))


def cmd_gallery(args):
    if not args.name:
        _emit(args, "\n".join(GALLERY) + "\n")
        return
    try:
        fx = fixture(args.name)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    _emit(args, dump_json(fx))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enharmonic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, network=True, out=True):
        p = sub.add_parser(name, help=help_)
        if network:
            p.add_argument("network", help="network JSON file")
        if out:
            p.add_argument("--out", help="write output here instead of stdout")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check the network structure")

    p = add("orientations", cmd_orientations, "list compatible acyclic orientations")
    p.add_argument("--count", action="store_true", help="print only the number of orientations")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)

    p = add("solve", cmd_solve, "solve the fixed-energy problem")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--all", action="store_true", help="one solution per compatible orientation")
    g.add_argument("--sigma", help="orientation as JSON {edge: +1|-1} or a file")
    p.add_argument("--energies", help="energies as JSON {edge: value} or a file")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)

    p = add("psi", cmd_psi, "energies of the harmonic extension for given conductances")
    p.add_argument("--conductances", required=True, help="JSON {edge: c} or a file")

    p = add("conductances", cmd_conductances, "conductances making a solution harmonic")
    p.add_argument("--solution", required=True, help="solution JSON (with 'h') or {vertex: value}")
    p.add_argument("--energies")

    p = add("jacobian-check", cmd_jacobian, "compare the predicted log-Jacobian with finite differences")
    p.add_argument("--conductances", required=True)
    p.add_argument("--step", type=float, default=1e-6)

    def diagram_flags(p):
        p.add_argument("--format", choices=("json", "svg"), default="json")
        p.add_argument("--unit", action="store_true", help="scale the SVG to the unit square")
        p.add_argument("--labels", action="store_true", help="label tiles in the SVG")

    p = add("tiling", cmd_tiling, "Smith diagram of a planar network")
    p.add_argument("--sigma")
    p.add_argument("--index", type=int, default=0, help="which solution, in orientation order")
    p.add_argument("--energies")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    diagram_flags(p)

    p = add("cartogram", cmd_cartogram, "retile a rectangle tiling to prescribed areas", network=False)
    p.add_argument("tiling", help="tiling JSON file")
    p.add_argument("--areas", help="JSON {tile: area} or a file (default: equal areas)")
    p.add_argument("--cross", choices=("horizontal", "vertical"), default=None,
                   help="how to resolve points where four tiles meet")
    diagram_flags(p)

    p = add("fields", cmd_fields, "exact number-field constructions", network=False)
    p.add_argument("kind", choices=("star", "quadratic"))
    p.add_argument("--poly", help="coefficients, highest degree first, e.g. '1,-6,4'")
    p.add_argument("--anchors", help="comma separated anchors, e.g. '0,1,6'")
    p.add_argument("--D", type=int)
    p.add_argument("--s", help="rational parameter for the quadratic construction")

    p = add("grid", cmd_grid, "lattice solves and scaling experiments", network=False)
    p.add_argument("--n", type=int)
    p.add_argument("--eps-list", help="comma separated mesh sizes, e.g. '1/10,1/20,1/40'")
    p.add_argument("--domain", choices=("square", "diamond", "disk", "file"), default="square")
    p.add_argument("--domain-file")
    p.add_argument("--boundary", choices=("corners", "full", "four-arc"), default="corners")
    p.add_argument("--energy", choices=("unit", "eps2"), default="unit")
    p.add_argument("--svg", help="write the Smith diagram of the solution here")

    p = add("riemann-map", cmd_riemann, "map a four-arc domain onto a rectangle", network=False)
    p.add_argument("--eps", default="1/20")
    p.add_argument("--domain", choices=("square", "diamond", "disk", "file"), default="diamond")
    p.add_argument("--domain-file")
    p.add_argument("--svg")

    p = add("gallery", cmd_gallery, "list or emit example networks", network=False)
    p.add_argument("name", nargs="?")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except EnharmonicError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())
