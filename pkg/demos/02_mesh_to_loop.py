"""One closed space curve covering every triangle of a watertight mesh.

Pairs adjacent triangles with a perfect matching of the face-adjacency
graph; dropping the matched pairs leaves disjoint face cycles, which get
bridged into a single loop.  Runs on a subdivided icosahedron and a torus
and exports OBJ polylines you can open in any 3D viewer.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from _shared import out_path

import numpy as np

from curvestego import TriangleMesh, curve_length, dual_graph, hamiltonian_cycle, perfect_matching
from curvestego.cli import curve_to_obj
from curvestego.hamiltonian import face_walk, residual_cycles
from curvestego.meshes import icosphere, torus


def cover(name, vertices, faces):
    mesh = TriangleMesh(vertices=vertices, faces=faces)
    graph = dual_graph(mesh)
    print(f"{name}: {mesh.n_faces} faces, dual graph with {len(graph.edges())} edges")

    matching = perfect_matching(graph)
    cycles = residual_cycles(graph, matching)
    print(f"  perfect matching of {len(matching)} pairs; removing it leaves "
          f"{len(cycles)} face cycle(s), sizes {sorted(len(c) for c in cycles)}")

    walk = face_walk(graph, matching)
    revisits = len(walk) - mesh.n_faces
    print(f"  merged walk visits {len(walk)} faces ({revisits} bridge revisits)")

    curve = hamiltonian_cycle(mesh, matching)
    counts = np.bincount(walk, minlength=mesh.n_faces)
    assert counts.min() >= 1
    print(f"  loop: {len(curve)} vertices, length {curve_length(curve):.2f}, "
          f"every face visited")

    path = out_path(f"02_{name}.obj")
    curve_to_obj(curve, path)
    print(f"  wrote {path}")


def main():
    cover("icosphere", *icosphere(2))
    cover("torus", *torus(16, 10))


if __name__ == "__main__":
    main()
