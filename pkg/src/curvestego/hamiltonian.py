"""Single closed loops that cover watertight triangle meshes.

Every watertight triangle mesh has a 3-regular dual graph with a perfect
matching.  Removing the matched dual edges leaves each face with exactly two
neighbors, i.e. a set of disjoint face cycles; bridging those cycles across
matched pairs merges them into one closed loop visiting every face.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .tour import Curve


@dataclass
class TriangleMesh:
    """Triangle surface mesh: (V, 3) vertex positions, (F, 3) index triples."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        self.faces = np.asarray(self.faces, dtype=int)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be a (V, 3) array")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise ValueError("faces must be an (F, 3) array of vertex indices")
        if self.faces.min(initial=0) < 0 or self.faces.max(initial=-1) >= len(
            self.vertices
        ):
            raise ValueError("face indices out of range")
        a = self.vertices[self.faces[:, 1]] - self.vertices[self.faces[:, 0]]
        b = self.vertices[self.faces[:, 2]] - self.vertices[self.faces[:, 0]]
        areas = 0.5 * np.linalg.norm(np.cross(a, b), axis=1)
        if np.any(areas <= 0):
            raise ValueError("mesh contains degenerate (zero-area) faces")

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def centroids(self) -> np.ndarray:
        return self.vertices[self.faces].mean(axis=1)


@dataclass
class DualGraph:
    """Face adjacency of a watertight mesh: one node per face, 3-regular."""

    n_nodes: int
    adjacency: list
    shared_edges: dict = field(repr=False)  # frozenset{f, g} -> (v0, v1)

    def edges(self):
        return sorted(
            (min(f, g), max(f, g))
            for key in self.shared_edges
            for f, g in [tuple(sorted(key))]
        )


def _edge_face_map(mesh: TriangleMesh) -> dict:
    edge_faces: dict = {}
    for fi, (a, b, c) in enumerate(mesh.faces):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (min(u, v), max(u, v))
            edge_faces.setdefault(key, []).append(fi)
    return edge_faces


def dual_graph(mesh: TriangleMesh) -> DualGraph:
    """Build the face-adjacency graph; raises if the mesh is not watertight."""
    edge_faces = _edge_face_map(mesh)
    bad = {e: fs for e, fs in edge_faces.items() if len(fs) != 2}
    if bad:
        e, fs = next(iter(bad.items()))
        raise ValueError(
            f"mesh is not watertight: edge {e} borders {len(fs)} face(s)"
        )
    adjacency = [[] for _ in range(mesh.n_faces)]
    shared = {}
    for edge, (f, g) in edge_faces.items():
        if f == g:
            raise ValueError(f"edge {edge} repeated within a single face")
        adjacency[f].append(g)
        adjacency[g].append(f)
        shared[frozenset((f, g))] = edge
    for fi, nbrs in enumerate(adjacency):
        nbrs.sort()
        if len(nbrs) != 3 or len(set(nbrs)) != 3:
            raise ValueError(f"dual node {fi} is not 3-regular")
    return DualGraph(n_nodes=mesh.n_faces, adjacency=adjacency, shared_edges=shared)


def _maximum_matching(adjacency: list) -> list:
    """Maximum cardinality matching in a general graph (blossom contraction).

    Returns ``match`` with ``match[v]`` the partner of v or -1.  Starts from a
    greedy matching, then repeatedly searches for augmenting paths with a BFS
    that shrinks odd cycles onto their base vertex.
    """
    n = len(adjacency)
    match = [-1] * n
    for v in range(n):
        if match[v] == -1:
            for u in adjacency[v]:
                if match[u] == -1:
                    match[v] = u
                    match[u] = v
                    break

    p = [-1] * n
    base = list(range(n))

    def lca(a, b):
        seen = [False] * n
        while True:
            a = base[a]
            seen[a] = True
            if match[a] == -1:
                break
            a = p[match[a]]
        while True:
            b = base[b]
            if seen[b]:
                return b
            b = p[match[b]]

    def mark_path(v, stem, child, in_blossom):
        while base[v] != stem:
            in_blossom[base[v]] = True
            in_blossom[base[match[v]]] = True
            p[v] = child
            child = match[v]
            v = p[match[v]]

    def find_augmenting_path(root):
        nonlocal p, base
        used = [False] * n
        p = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to in adjacency[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and p[match[to]] != -1):
                    stem = lca(v, to)
                    in_blossom = [False] * n
                    mark_path(v, stem, to, in_blossom)
                    mark_path(to, stem, v, in_blossom)
                    for i in range(n):
                        if in_blossom[base[i]]:
                            base[i] = stem
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif p[to] == -1:
                    p[to] = v
                    if match[to] == -1:
                        u = to
                        while u != -1:
                            pv = p[u]
                            ppv = match[pv]
                            match[u] = pv
                            match[pv] = u
                            u = ppv
                        return True
                    used[match[to]] = True
                    queue.append(match[to])
        return False

    for v in range(n):
        if match[v] == -1:
            find_augmenting_path(v)
    return match


def perfect_matching(graph: DualGraph) -> list:
    """Perfect matching of the dual graph as a sorted list of face pairs."""
    if graph.n_nodes % 2 != 0:
        raise ValueError("graph has an odd number of nodes; no perfect matching")
    match = _maximum_matching(graph.adjacency)
    if any(m == -1 for m in match):
        raise ValueError("no perfect matching found (pathological mesh)")
    return sorted({(min(v, m), max(v, m)) for v, m in enumerate(match)})


def residual_cycles(graph: DualGraph, matching: list) -> list:
    """Disjoint face cycles left after removing matched dual edges."""
    partner = {}
    for a, b in matching:
        partner[a] = b
        partner[b] = a
    if len(partner) != graph.n_nodes:
        raise ValueError("matching is not perfect on this graph")
    residual = []
    for v, nbrs in enumerate(graph.adjacency):
        rem = [u for u in nbrs if u != partner[v]]
        if len(rem) != 2:
            raise ValueError(f"face {v} has {len(rem)} unmatched neighbors, not 2")
        residual.append(rem)
    cycles = []
    seen = [False] * graph.n_nodes
    for start in range(graph.n_nodes):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        prev, cur = None, start
        while True:
            a, b = residual[cur]
            nxt = a if a != prev else b
            if nxt == start:
                break
            cycle.append(nxt)
            seen[nxt] = True
            prev, cur = cur, nxt
        cycles.append(cycle)
    return cycles


def face_walk(graph: DualGraph, matching: list) -> list:
    """Closed walk visiting every face, bridged across matched pairs.

    Cycles are merged over a breadth-first spanning tree of the
    cycle-adjacency graph (rooted at the largest cycle); each merge routes
    the walk through one matched face pair, which is then visited twice.
    """
    cycles = residual_cycles(graph, matching)
    if len(cycles) == 1:
        return list(cycles[0])
    cycle_id = {}
    for ci, cyc in enumerate(cycles):
        for f in cyc:
            cycle_id[f] = ci
    links = [[] for _ in cycles]
    for a, b in matching:
        ca, cb = cycle_id[a], cycle_id[b]
        if ca != cb:
            links[ca].append((cb, a, b))
            links[cb].append((ca, b, a))
    for lk in links:
        lk.sort()

    root = max(range(len(cycles)), key=lambda ci: (len(cycles[ci]), -min(cycles[ci])))
    visited = [False] * len(cycles)
    visited[root] = True
    order = []
    queue = deque([root])
    while queue:
        ci = queue.popleft()
        for cj, a, b in links[ci]:
            if not visited[cj]:
                visited[cj] = True
                order.append((cj, a, b))
                queue.append(cj)
    if not all(visited):
        raise ValueError("cycle-adjacency graph is disconnected (disconnected mesh?)")

    walk = list(cycles[root])
    for cj, a, b in order:
        pos = walk.index(a)
        child = cycles[cj]
        k = child.index(b)
        rotated = child[k:] + child[:k]
        walk = walk[: pos + 1] + rotated + [b] + walk[pos:]
    return walk


def hamiltonian_cycle(mesh: TriangleMesh, matching: list) -> Curve:
    """Closed 3D polyline covering the mesh: centroids of the face walk,
    with shared-edge midpoints inserted wherever the walk crosses a bridge."""
    graph = dual_graph(mesh)
    walk = face_walk(graph, matching)
    matched = {frozenset(pair) for pair in matching}
    centroids = mesh.centroids()
    points = []
    n = len(walk)
    for k, f in enumerate(walk):
        points.append(centroids[f])
        g = walk[(k + 1) % n]
        if frozenset((f, g)) in matched:
            v0, v1 = graph.shared_edges[frozenset((f, g))]
            points.append((mesh.vertices[v0] + mesh.vertices[v1]) / 2.0)
    return Curve(points=np.asarray(points))


def load_mesh(path) -> TriangleMesh:
    """Read a triangle mesh from an OFF or OBJ file (triangles only)."""
    path = str(path)
    lower = path.lower()
    if lower.endswith(".off"):
        return _load_off(path)
    if lower.endswith(".obj"):
        return _load_obj(path)
    raise ValueError(f"unsupported mesh format for {path} (use .off or .obj)")


def _load_off(path) -> TriangleMesh:
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError(f"{path} is not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    vertices = np.array(
        [tokens[pos + 3 * i : pos + 3 * i + 3] for i in range(nv)], dtype=float
    )
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise ValueError(f"{path} contains a {cnt}-gon; only triangles supported")
        faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
        pos += 1 + cnt
    return TriangleMesh(vertices=vertices, faces=np.array(faces, dtype=int))


def _load_obj(path) -> TriangleMesh:
    vertices = []
    faces = []
    with open(path) as fh:
        for line in fh:
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(tok.split("/")[0]) for tok in parts[1:]]
                if len(idx) != 3:
                    raise ValueError(
                        f"{path} contains a {len(idx)}-gon; only triangles supported"
                    )
                faces.append([i - 1 if i > 0 else len(vertices) + i for i in idx])
    if not vertices or not faces:
        raise ValueError(f"no triangle data found in {path}")
    return TriangleMesh(
        vertices=np.array(vertices, dtype=float), faces=np.array(faces, dtype=int)
    )


def save_off(mesh: TriangleMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(mesh.vertices)} {len(mesh.faces)} 0\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]} {v[1]} {v[2]}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")
