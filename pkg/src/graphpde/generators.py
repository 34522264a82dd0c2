"""Small graph families and random connected domains."""
from __future__ import annotations

import numpy as np

from .graph import Domain, Graph, GraphFunction


def path_domain(n: int) -> Domain:
    """Path ``0 - 1 - ... - n-1`` with the two end vertices as boundary."""
    if n < 3:
        raise ValueError("a path domain needs at least 3 vertices")
    edges = [(str(k), str(k + 1)) for k in range(n - 1)]
    return Domain(Graph.from_edges(edges), tuple(str(k) for k in range(1, n - 1)))


def star_domain(k: int) -> Domain:
    edges = [("c", f"l{i}") for i in range(k)]
    return Domain(Graph.from_edges(edges), ("c",))


def random_domain(rng: np.random.Generator, n_vertices: int, extra_edges: float = 1.0,
                  interior_fraction: float = 0.7) -> Domain:
    """Random connected graph with a connected interior and nonempty boundary.

    A random spanning tree is densified with about ``extra_edges * n`` chords;
    the interior is grown by breadth-first search from a random root.
    """
    n = int(n_vertices)
    if n < 2:
        raise ValueError("need at least 2 vertices")
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(0, k)])
        edges.add((min(a, b), max(a, b)))
    for _ in range(int(extra_edges * n)):
        a, b = (int(x) for x in rng.integers(0, n, size=2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    edges = sorted(edges)
    adj = {v: [] for v in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)

    target = max(1, min(n - 1, int(round(interior_fraction * n))))
    root = int(rng.integers(0, n))
    interior, seen, frontier = [], {root}, [root]
    while frontier and len(interior) < target:
        x = frontier.pop(int(rng.integers(0, len(frontier))))
        interior.append(x)
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    graph = Graph.from_edges([(f"v{a}", f"v{b}") for a, b in edges])
    return Domain(graph, tuple(f"v{x}" for x in interior))


def random_function(rng: np.random.Generator, domain: Domain, dirichlet: bool = True,
                    real: bool = False):
    n = domain.n_interior if dirichlet else domain.n_closure
    vals = rng.standard_normal(n)
    if not real:
        vals = vals + 1j * rng.standard_normal(n)
    if dirichlet:
        return GraphFunction.from_interior(domain, vals)
    return GraphFunction(domain, vals)
