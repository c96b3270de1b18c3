"""Command-line interface orchestrating the verification pipeline.

Exit codes: 0 when every requested check passes, 1 when a check fails
(the certificate is still written), 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import sys

from .certificate import build_certificate, certificate_text, write_certificate
from .corpus import GeneratorError, GeneratorSpec, generate
from .flatness import ToleranceProfile
from .formats import FormatError, LoadedMesh, read_mesh, write_mesh
from .mesh import MeshError
from .refine import TriangulationError, barycentric_subdivision, triangulate_faces


def _add_mesh_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("mesh", nargs="+",
                   help="mesh file (.off/.obj), or a faces file and a vertices file")
    p.add_argument("--format", choices=("off", "obj", "pair"), default=None,
                   help="input format (default: by extension, or pair for two paths)")
    p.add_argument("--zero-based", action="store_true",
                   help="two-file face indices count from 0 instead of 1")


def _add_check_arguments(p: argparse.ArgumentParser) -> None:
    defaults = ToleranceProfile()
    p.add_argument("--planarity-tol", type=float, default=defaults.planarity_tol,
                   help="max relative deviation from the fitted face plane")
    p.add_argument("--defect-tol", type=float, default=defaults.defect_tol,
                   help="max |angle defect| in radians for a flat vertex")
    p.add_argument("--link-tol", type=float, default=defaults.link_tol,
                   help="angular resolution of the vertex link embedding test")
    p.add_argument("--report", metavar="PATH", default=None,
                   help="write the certificate to PATH")
    p.add_argument("--quiet", action="store_true", help="suppress the summary lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatcheck",
        description="Verify closed-manifold, topology, flatness and "
                    "self-intersection properties of polyhedral surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, blurb in (
        ("check", "run the full pipeline and emit a certificate"),
        ("topology", "Euler characteristic, orientability, homology, surface type"),
        ("flatness", "face planarity, angle defects, vertex link embedding"),
        ("intersections", "global self-intersection report"),
    ):
        p = sub.add_parser(name, help=blurb)
        _add_mesh_arguments(p)
        _add_check_arguments(p)

    p = sub.add_parser("triangulate", help="triangulate all faces, write the result")
    _add_mesh_arguments(p)
    _add_check_arguments(p)
    p.add_argument("-o", "--output", required=True, help="output mesh path (.off/.obj)")

    p = sub.add_parser("subdivide", help="barycentric subdivision of the triangulated mesh")
    _add_mesh_arguments(p)
    _add_check_arguments(p)
    p.add_argument("-o", "--output", required=True, help="output mesh path (.off/.obj)")

    p = sub.add_parser("generate", help="emit a built-in test surface")
    p.add_argument("kind", help="tetrahedron | cube | icosahedron | grid_torus m n | "
                                "grid_klein m n | folded_flat_torus m n folds | "
                                "doubled_cone angle [segments]")
    p.add_argument("params", nargs="*", help="numeric parameters for the kind")
    p.add_argument("-o", "--output", required=True, help="output mesh path (.off/.obj)")
    return parser


def _load(args) -> LoadedMesh:
    return read_mesh(args.mesh, fmt=args.format,
                     index_base=0 if args.zero_based else 1)


def _tolerances(args) -> ToleranceProfile:
    return ToleranceProfile(
        planarity_tol=args.planarity_tol,
        defect_tol=args.defect_tol,
        link_tol=args.link_tol,
    )


def _spec_from_params(kind: str, params: list[str]) -> GeneratorSpec:
    def ints(n):
        if len(params) != n:
            raise GeneratorError(f"{kind} takes {n} integer parameter(s), got {len(params)}")
        try:
            return [int(p) for p in params]
        except ValueError:
            raise GeneratorError(f"{kind} parameters must be integers: {params}")

    if kind in ("tetrahedron", "cube", "icosahedron"):
        if params:
            raise GeneratorError(f"{kind} takes no parameters")
        return GeneratorSpec(kind)
    if kind in ("grid_torus", "grid_klein"):
        m, n = ints(2)
        return GeneratorSpec(kind, m=m, n=n)
    if kind == "folded_flat_torus":
        m, n, folds = ints(3)
        return GeneratorSpec(kind, m=m, n=n, folds=folds)
    if kind == "doubled_cone":
        if len(params) not in (1, 2):
            raise GeneratorError("doubled_cone takes: total_angle [segments]")
        try:
            angle = float(params[0])
            segments = int(params[1]) if len(params) == 2 else None
        except ValueError:
            raise GeneratorError(f"bad doubled_cone parameters: {params}")
        return GeneratorSpec(kind, total_angle=angle, segments=segments)
    raise GeneratorError(f"unknown generator kind {kind!r}")


def _flag(ok: bool | None) -> str:
    if ok is None:
        return "SKIP"
    return "PASS" if ok else "FAIL"


def _summarize(cert: dict, scope: str, out) -> None:
    verdict = cert["verdict"]
    inp = cert["input"]
    print(f"vertices {inp['n_vertices']}  edges {inp['n_edges']}  faces {inp['n_faces']}",
          file=out)
    print(f"closed manifold: {_flag(verdict['closed_manifold'])}", file=out)
    if not verdict["closed_manifold"]:
        for d in cert["combinatorics"]["defects"][:8]:
            print(f"  defect: {d['kind']} at {d['location']}: {d['detail']}", file=out)
        return
    combi = cert["combinatorics"]
    if scope in ("check", "topology"):
        topo = cert["topology"]
        print(f"components {combi['components']}  "
              f"euler characteristic {combi['euler_characteristic']}  "
              f"orientable {combi['orientable']}", file=out)
        print(f"homology: H0={topo['homology'][0]}  H1={topo['homology'][1]}  "
              f"H2={topo['homology'][2]}", file=out)
        cls = topo["classification"]
        tail = "" if cls["consistent"] else f"  (inconsistent: {'; '.join(cls['problems'])})"
        print(f"surface: {cls['name']}{tail}", file=out)
    if scope in ("check", "flatness"):
        geo = cert["geometry"]
        print(f"faces planar: {_flag(geo['all_faces_planar'])} "
              f"(max deviation {geo['max_planarity_deviation']:.3g})", file=out)
        print(f"defects zero: {_flag(geo['all_defects_zero'])} "
              f"(max |defect| {geo['max_abs_defect']:.3g})", file=out)
        print(f"links embedded: {_flag(geo['all_links_embedded'])}"
              + (f" (failures at {geo['link_failures'][:8]})" if geo["link_failures"] else ""),
              file=out)
    if scope in ("check", "intersections"):
        imm = cert["immersion"]
        if imm.get("error"):
            print(f"self-intersections: SKIP ({imm['error']})", file=out)
        else:
            print(f"self-intersections: {imm['pair_count']} pair(s), "
                  f"{imm['local_overlap_count']} local overlap(s)", file=out)
            print(f"classification: {imm['classification']}", file=out)


def _scope_pass(cert: dict, scope: str) -> bool:
    verdict = cert["verdict"]
    if not verdict["closed_manifold"]:
        return False
    if scope == "check":
        return bool(verdict["pass"])
    if scope == "flatness":
        return bool(verdict["flat"] and verdict["locally_embedded"])
    if scope == "intersections":
        return cert["immersion"].get("error") is None
    return True     # topology: computable once the mesh is a closed manifold


def _run_check(args, scope: str) -> int:
    loaded = _load(args)
    cert = build_certificate(loaded.complex, _tolerances(args), sources=loaded.sources)
    if args.report:
        write_certificate(cert, args.report)
    elif scope == "check" and args.quiet:
        # certificate is the only output in quiet check mode
        sys.stdout.write(certificate_text(cert))
    if not args.quiet:
        _summarize(cert, scope, sys.stdout)
        if scope == "check" and not args.report:
            sys.stdout.write(certificate_text(cert))
    return 0 if _scope_pass(cert, scope) else 1


def _run_refine(args, subdivide: bool) -> int:
    loaded = _load(args)
    refinement = triangulate_faces(loaded.complex, _tolerances(args))
    if subdivide:
        refinement = barycentric_subdivision(refinement.derived)
    write_mesh(refinement.derived, args.output)
    return 0


def _run_generate(args) -> int:
    spec = _spec_from_params(args.kind, args.params)
    write_mesh(generate(spec), args.output)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        code = exc.code if isinstance(exc.code, int) else 2
        return 0 if code == 0 else 2
    try:
        if args.command in ("check", "topology", "flatness", "intersections"):
            return _run_check(args, args.command)
        if args.command == "triangulate":
            return _run_refine(args, subdivide=False)
        if args.command == "subdivide":
            return _run_refine(args, subdivide=True)
        if args.command == "generate":
            return _run_generate(args)
        parser.error(f"unknown command {args.command!r}")
    except TriangulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, GeneratorError, MeshError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
