"""Finite graphs, interior/boundary domains and discrete calculus.

A :class:`Domain` is an interior vertex set ``S`` of a simple graph together
with its vertex boundary (vertices outside ``S`` adjacent to ``S``).  Functions
live on the closure ``S ∪ ∂S`` and are stored as complex arrays ordered with
the interior first (input order) followed by the boundary (order of first
appearance in the edge list).
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graph input or invalid domain construction."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph given by its edge list."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    adjacency: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj = {v: [] for v in self.vertices}
        seen = set()
        for x, y in self.edges:
            if x == y:
                raise GraphError(f"self-loop at vertex {x!r}")
            key = frozenset((x, y))
            if key in seen:
                raise GraphError(f"duplicate edge ({x!r}, {y!r})")
            seen.add(key)
            if x not in adj or y not in adj:
                raise GraphError(f"edge ({x!r}, {y!r}) uses an unknown vertex")
            adj[x].append(y)
            adj[y].append(x)
        object.__setattr__(self, "adjacency", {v: tuple(n) for v, n in adj.items()})

    @classmethod
    def from_edges(cls, edges) -> "Graph":
        edges = tuple((str(x), str(y)) for x, y in edges)
        vertices = []
        known = set()
        for e in edges:
            for v in e:
                if v not in known:
                    known.add(v)
                    vertices.append(v)
        return cls(tuple(vertices), edges)

    def neighbors(self, x: str) -> tuple[str, ...]:
        return self.adjacency[x]

    def degree(self, x: str) -> int:
        return len(self.adjacency[x])

    def adjacent(self, x: str, y: str) -> bool:
        return y in self.adjacency.get(x, ())


@dataclass(frozen=True)
class Domain:
    """Interior set ``S`` of a graph with derived boundary and closure.

    Attributes
    ----------
    graph : Graph
        The ambient graph.
    interior : tuple of str
        Interior vertices in their fixed order.
    boundary : tuple of str
        Vertices not in ``S`` with at least one neighbour in ``S``.
    dropped : int
        Number of graph vertices outside the closure.
    """

    graph: Graph
    interior: tuple[str, ...]
    boundary: tuple[str, ...] = field(init=False)
    dropped: int = field(init=False, compare=False)
    index: dict = field(init=False, repr=False, compare=False)
    # (i, j) closure indices, one row per undirected edge with both ends in the closure
    edge_index: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        graph = self.graph
        interior = tuple(self.interior)
        if not interior:
            raise GraphError("interior vertex list is empty")
        if len(set(interior)) != len(interior):
            raise GraphError("interior vertex list has repeats")
        s = set(interior)
        for v in interior:
            if v not in graph.adjacency:
                raise GraphError(f"interior vertex {v!r} does not appear in the edge list")

        boundary = []
        bset = set()
        for x, y in graph.edges:
            for a, b in ((x, y), (y, x)):
                if a in s and b not in s and b not in bset:
                    bset.add(b)
                    boundary.append(b)
        if not boundary:
            raise GraphError("boundary is empty; at least one interior vertex needs an outside neighbour")
        if not _connected(interior, graph):
            raise GraphError("induced subgraph on the interior is disconnected")

        closure = interior + tuple(boundary)
        index = {v: i for i, v in enumerate(closure)}
        pairs = [(index[x], index[y]) for x, y in graph.edges if x in index and y in index]
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "boundary", tuple(boundary))
        object.__setattr__(self, "dropped", len(graph.vertices) - len(closure))
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "edge_index", np.array(pairs, dtype=np.intp).reshape(-1, 2))

    @property
    def closure(self) -> tuple[str, ...]:
        return self.interior + self.boundary

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    @property
    def n_closure(self) -> int:
        return len(self.interior) + len(self.boundary)

    def is_interior(self, v: str) -> bool:
        i = self.index.get(v)
        return i is not None and i < self.n_interior

    def degree(self, x: str) -> int:
        """Number of neighbours of ``x`` inside the closure."""
        return sum(1 for y in self.graph.neighbors(x) if y in self.index)


def _connected(vertices, graph: Graph) -> bool:
    allowed = set(vertices)
    start = vertices[0]
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in graph.neighbors(x):
            if y in allowed and y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(allowed)


class GraphFunction:
    """Complex-valued function on the closure of a domain."""

    __slots__ = ("domain", "values")

    def __init__(self, domain: Domain, values):
        values = np.array(values, dtype=complex)
        if values.shape != (domain.n_closure,):
            raise ValueError(
                f"expected {domain.n_closure} closure values, got shape {values.shape}"
            )
        self.domain = domain
        self.values = values

    @classmethod
    def zeros(cls, domain: Domain) -> "GraphFunction":
        return cls(domain, np.zeros(domain.n_closure, dtype=complex))

    @classmethod
    def from_interior(cls, domain: Domain, values) -> "GraphFunction":
        """Extend interior values by zero to the boundary (Dirichlet extension)."""
        values = np.asarray(values, dtype=complex)
        if values.shape != (domain.n_interior,):
            raise ValueError(
                f"expected {domain.n_interior} interior values, got shape {values.shape}"
            )
        out = np.zeros(domain.n_closure, dtype=complex)
        out[: domain.n_interior] = values
        return cls(domain, out)

    @classmethod
    def from_mapping(cls, domain: Domain, mapping) -> "GraphFunction":
        """Build from ``{vertex: value}``; unspecified closure vertices are 0."""
        out = np.zeros(domain.n_closure, dtype=complex)
        for v, val in mapping.items():
            if v not in domain.index:
                raise GraphError(f"vertex {v!r} is not in the closure of the domain")
            out[domain.index[v]] = val
        return cls(domain, out)

    @property
    def interior(self) -> np.ndarray:
        return self.values[: self.domain.n_interior]

    @property
    def boundary(self) -> np.ndarray:
        return self.values[self.domain.n_interior:]

    def is_dirichlet(self) -> bool:
        return not np.any(self.boundary)

    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def __getitem__(self, v: str) -> complex:
        return complex(self.values[self.domain.index[v]])

    def conj(self) -> "GraphFunction":
        return GraphFunction(self.domain, self.values.conj())

    def to_mapping(self) -> dict:
        return {v: complex(z) for v, z in zip(self.domain.closure, self.values)}

    def __repr__(self):
        return f"GraphFunction({self.to_mapping()!r})"


# ---------------------------------------------------------------------------
# input documents


def _vertex_id(v) -> str:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise GraphError(f"vertex identifier must be a string, got {v!r}")
    s = str(v)
    if not s or any(c.isspace() for c in s):
        raise GraphError(f"invalid vertex identifier {s!r}")
    return s


def load_document(data: dict) -> tuple[Domain, dict]:
    """Validate a decoded graph document.

    Returns the domain and a dict with the optional ``initial``,
    ``initial_velocity`` and ``potential`` entries converted to
    :class:`GraphFunction`.
    """
    if not isinstance(data, dict):
        raise GraphError("graph document must be a mapping")
    if "edges" not in data or "interior" not in data:
        raise GraphError("graph document needs 'edges' and 'interior'")
    edges = []
    for e in data["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise GraphError(f"edge must be a pair of vertex identifiers, got {e!r}")
        edges.append((_vertex_id(e[0]), _vertex_id(e[1])))
    interior = [_vertex_id(v) for v in data["interior"]]
    domain = Domain(Graph.from_edges(edges), tuple(interior))

    extras = {}
    for key in ("initial", "initial_velocity"):
        if data.get(key) is None:
            continue
        mapping = {}
        for v, pair in data[key].items():
            v = _vertex_id(v)
            if isinstance(pair, (int, float)):
                mapping[v] = complex(pair)
            elif isinstance(pair, (list, tuple)) and len(pair) == 2:
                mapping[v] = complex(float(pair[0]), float(pair[1]))
            else:
                raise GraphError(f"{key}[{v!r}] must be [real, imag], got {pair!r}")
        extras[key] = GraphFunction.from_mapping(domain, mapping)
    if data.get("potential") is not None:
        pot = np.zeros(domain.n_closure)
        for v, val in data["potential"].items():
            v = _vertex_id(v)
            if not domain.is_interior(v):
                raise GraphError(f"potential given at non-interior vertex {v!r}")
            if isinstance(val, bool) or not isinstance(val, (int, float)) or val < 0:
                raise GraphError(f"potential[{v!r}] must be a nonnegative number, got {val!r}")
            pot[domain.index[v]] = val
        extras["potential"] = GraphFunction(domain, pot)
    return domain, extras


def parse_graph(text: str) -> Domain:
    """Parse a JSON graph document into a :class:`Domain`."""
    return parse_document(text)[0]


def parse_document(text: str) -> tuple[Domain, dict]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"graph document is not valid JSON: {exc}") from None
    return load_document(data)


def dump_document(domain: Domain, initial: GraphFunction | None = None,
                  initial_velocity: GraphFunction | None = None,
                  potential: GraphFunction | None = None) -> str:
    """Serialise back to the JSON input format (zero entries are omitted)."""
    doc = {
        "edges": [list(e) for e in domain.graph.edges],
        "interior": list(domain.interior),
    }
    for key, f in (("initial", initial), ("initial_velocity", initial_velocity)):
        if f is not None:
            doc[key] = {v: [z.real, z.imag] for v, z in f.to_mapping().items() if z != 0}
    if potential is not None:
        doc["potential"] = {v: z.real for v, z in potential.to_mapping().items() if z != 0}
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# discrete calculus


def gradient(f: GraphFunction, x: str, y: str) -> complex:
    """Edge difference ``f(y) - f(x)``; only defined for adjacent vertices."""
    dom = f.domain
    if x not in dom.index or y not in dom.index:
        raise GraphError(f"({x!r}, {y!r}) is not inside the closure")
    if not dom.graph.adjacent(x, y):
        raise GraphError(f"{x!r} and {y!r} are not adjacent")
    return f[y] - f[x]


def laplacian_apply(f: GraphFunction, x: str) -> complex:
    """``(Δf)(x) = Σ_{y~x} (f(y) - f(x))`` at an interior vertex."""
    dom = f.domain
    if not dom.is_interior(x):
        raise GraphError(f"Laplacian is evaluated on interior vertices only, got {x!r}")
    fx = f[x]
    return sum((f[y] - fx for y in dom.graph.neighbors(x)), 0j)


def laplacian(f: GraphFunction, closure: bool = False) -> np.ndarray:
    """Vectorised Laplacian.

    With ``closure=True`` the neighbour sum is also taken at boundary
    vertices, restricted to neighbours inside the closure; otherwise only the
    interior values are returned.
    """
    dom = f.domain
    i, j = dom.edge_index.T
    diff = f.values[j] - f.values[i]
    out = np.zeros(dom.n_closure, dtype=complex)
    np.add.at(out, i, diff)
    np.add.at(out, j, -diff)
    return out if closure else out[: dom.n_interior]


def mass_norm_sq(f: GraphFunction) -> float:
    return float(np.sum(np.abs(f.values) ** 2))


def dirichlet_energy(f: GraphFunction) -> float:
    """Sum of ``|f(y) - f(x)|²`` over ordered adjacent pairs in the closure.

    Each undirected edge contributes twice.
    """
    i, j = f.domain.edge_index.T
    return float(2.0 * np.sum(np.abs(f.values[j] - f.values[i]) ** 2))


def green_sides(f: GraphFunction, g: GraphFunction) -> tuple[complex, complex]:
    """Both sides of the summation-by-parts identity on the closure.

    ``Σ_x (Δf)(x) conj(g(x))`` and ``-½ Σ_{(x,y)} ∇_xy f conj(∇_xy g)`` with the
    second sum over ordered adjacent pairs.
    """
    if f.domain is not g.domain and f.domain != g.domain:
        raise GraphError("functions live on different domains")
    lhs = complex(np.sum(laplacian(f, closure=True) * np.conj(g.values)))
    i, j = f.domain.edge_index.T
    df = f.values[j] - f.values[i]
    dg = g.values[j] - g.values[i]
    # ordered pairs: (x,y) and (y,x) give the same product
    rhs = complex(-0.5 * 2.0 * np.sum(df * np.conj(dg)))
    return lhs, rhs


def green_identity_residual(f: GraphFunction, g: GraphFunction) -> float:
    lhs, rhs = green_sides(f, g)
    return abs(lhs - rhs)


def boundary_flux(f: GraphFunction) -> complex:
    """``Σ_{x∈S} Σ_{y∈∂S, y~x} conj(f(x)) ∇_xy f``."""
    dom = f.domain
    n = dom.n_interior
    total = 0j
    for i, j in dom.edge_index:
        if i < n <= j:
            x, y = i, j
        elif j < n <= i:
            x, y = j, i
        else:
            continue
        total += np.conj(f.values[x]) * (f.values[y] - f.values[x])
    return complex(total)


def interior_green_sides(f: GraphFunction) -> tuple[complex, complex]:
    """Both sides of the first Green formula on the interior.

    Returns ``Σ_{x∈S} (Δf)(x) conj(f(x))`` and
    ``-½ Σ_{(x,y)⊂S} |∇_xy f|² + boundary_flux(f)``.
    """
    dom = f.domain
    n = dom.n_interior
    lhs = complex(np.sum(laplacian(f) * np.conj(f.interior)))
    i, j = dom.edge_index.T
    inner = (i < n) & (j < n)
    grad_sq = 2.0 * np.sum(np.abs(f.values[j[inner]] - f.values[i[inner]]) ** 2)
    return lhs, -0.5 * grad_sq + boundary_flux(f)
