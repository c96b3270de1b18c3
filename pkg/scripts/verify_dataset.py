"""Verify a mesh shipped as a face file plus a vertex file.

Runs the full pipeline on the two-file layout: manifold check, topology
and surface classification, face planarity, angle defects, vertex links,
self-intersection classification.  Prints a human-readable summary,
optionally writes the canonical JSON certificate, and exits 0 only when
the mesh is flat with embedded links.

Example:

    python3 scripts/verify_dataset.py --faces faces.txt --vertices vertices.txt \
        --report certificate.json
"""

from __future__ import annotations

import argparse
import sys
import time

from flatcheck import read_pair
from flatcheck.certificate import build_certificate, certificate_text
from flatcheck.flatness import ToleranceProfile


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="verify a two-file mesh end to end and emit a certificate"
    )
    parser.add_argument("--faces", required=True, help="face list, one face per line")
    parser.add_argument("--vertices", required=True, help="vertex coordinates, xyz per line")
    parser.add_argument(
        "--index-base",
        type=int,
        choices=(0, 1),
        default=1,
        help="how the face file numbers vertices (default 1)",
    )
    parser.add_argument("--report", help="write the JSON certificate here")
    parser.add_argument("--planarity-tol", type=float, default=1e-8)
    parser.add_argument("--defect-tol", type=float, default=1e-8)
    parser.add_argument("--link-tol", type=float, default=1e-9)
    parser.add_argument("--quiet", action="store_true", help="summary lines only")
    args = parser.parse_args(argv)

    try:
        loaded = read_pair(args.faces, args.vertices, index_base=args.index_base)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    tol = ToleranceProfile(
        planarity_tol=args.planarity_tol,
        defect_tol=args.defect_tol,
        link_tol=args.link_tol,
    )
    t0 = time.perf_counter()
    cert = build_certificate(loaded.complex, tolerances=tol, sources=loaded.sources)
    elapsed = time.perf_counter() - t0

    inp = cert["input"]
    print(
        f"mesh: {inp['n_vertices']} vertices, {inp['n_edges']} edges, "
        f"{inp['n_faces']} faces"
    )
    census = ", ".join(
        f"{n}-gons: {k}" for n, k in sorted(inp["face_degree_census"].items())
    )
    print(f"faces by degree: {census}")

    comb = cert["combinatorics"]
    topo = cert["topology"]
    if not comb["closed_manifold"]:
        print("manifold: FAIL")
        for kind, where in comb["defects"]:
            print(f"  {kind} at {tuple(where)}")
    else:
        orient = "orientable" if comb["orientable"] else "nonorientable"
        print(
            f"topology: chi={comb['euler_characteristic']} {orient} "
            f"betti={tuple(topo['betti'])} -> {topo['classification']['name']}"
        )

    geo = cert["geometry"]
    if geo is None:
        print("geometry: skipped (not a closed manifold)")
    elif "error" in geo:
        print(f"geometry: FAIL ({geo['error']})")
    else:
        print(
            f"planarity: max relative deviation {geo['max_planarity_deviation']:.3e} "
            f"(tol {tol.planarity_tol:.1e})"
        )
        print(
            f"defects: max |defect| {geo['max_abs_defect']:.3e} "
            f"(tol {tol.defect_tol:.1e})"
        )
        failures = geo["link_failures"]
        if failures:
            print(f"links: {len(failures)} not embedded, first at vertex {failures[0]}")
        else:
            print("links: all embedded")

    imm = cert["immersion"]
    if imm is None:
        print("immersion: skipped")
    elif "error" in imm:
        print(f"immersion: FAIL ({imm['error']})")
    else:
        print(
            f"self-intersections: {imm['pair_count']} crossing pairs "
            f"-> {imm['classification']}"
        )
        if not args.quiet and imm["kind_census"]:
            for kind, k in sorted(imm["kind_census"].items()):
                print(f"  {kind}: {k}")

    verdict = cert["verdict"]
    print(f"verdict: {'PASS' if verdict['pass'] else 'FAIL'} ({elapsed:.2f}s)")

    if args.report:
        text = certificate_text(cert)
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"certificate written to {args.report}")

    return 0 if verdict["pass"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
