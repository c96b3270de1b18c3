"""Write the standard mesh corpus to disk as OFF files plus a manifest.

Each generator in the standard corpus is materialized under the output
directory as `<label>.off`, and `manifest.json` records per-mesh counts
and topology so downstream runs can sanity-check what they loaded.

Example:

    python3 scripts/build_corpus.py -o corpus/
"""

from __future__ import annotations

import argparse
from pathlib import Path

from flatcheck import (
    boundary_matrices,
    check_closed_manifold,
    classify_surface,
    edge_census,
    euler_characteristic,
    generate,
    homology_profile,
    orientability,
    standard_corpus,
    write_off,
)
from flatcheck.certificate import canonical_json


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="materialize the standard corpus")
    parser.add_argument("-o", "--out-dir", default="corpus", help="output directory")
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest = []
    for spec in standard_corpus():
        cx = generate(spec)
        path = out / f"{spec.label}.off"
        write_off(cx, path)

        mesh = check_closed_manifold(cx)
        chi = euler_characteristic(mesh)
        orient = orientability(mesh).orientable
        prof = homology_profile(boundary_matrices(mesh))
        manifest.append(
            {
                "label": spec.label,
                "file": path.name,
                "n_vertices": cx.n_vertices,
                "n_edges": len(edge_census(cx)),
                "n_faces": cx.n_faces,
                "euler_characteristic": chi,
                "orientable": orient,
                "betti": list(prof.betti),
                "surface": classify_surface(prof, chi, orient).name,
            }
        )
        print(f"{spec.label}: {cx.n_vertices}V {cx.n_faces}F -> {path}")

    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json({"meshes": manifest}) + "\n")
    print(f"manifest written to {manifest_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
