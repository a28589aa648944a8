"""Shared helpers: seeded random instances on each manifold."""

import numpy as np
import pytest

from mvgraph.graphs import WeightedGraph
from mvgraph.fields import VertexFunction
from mvgraph.manifolds import Circle, Euclidean, Spd, Sphere2


def random_symmetric_graph(rng, n, extra=None):
    """Connected graph with symmetric edge set and symmetric weights."""
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        w = float(rng.uniform(0.1, 1.0))
        edges[(u, v)] = w
        edges[(v, u)] = w
    extra = 2 * n if extra is None else extra
    for _ in range(extra):
        u, v = rng.integers(0, n, size=2)
        u, v = int(u), int(v)
        if u == v or (u, v) in edges:
            continue
        w = float(rng.uniform(0.1, 1.0))
        edges[(u, v)] = w
        edges[(v, u)] = w
    triples = [(u, v, w) for (u, v), w in edges.items()]
    return WeightedGraph.from_edges(n, triples, symmetric=True)


def random_point(manifold, rng, n=None):
    """Uniform-ish random points; shape (n, *point_shape) or point_shape."""
    shape = (n,) if n is not None else ()
    if isinstance(manifold, Euclidean):
        return rng.normal(size=shape + manifold.point_shape)
    if isinstance(manifold, Circle):
        return rng.uniform(-np.pi + 1e-9, np.pi, size=shape + (1,))
    if isinstance(manifold, Sphere2):
        v = rng.normal(size=shape + (3,))
        return v / np.linalg.norm(v, axis=-1, keepdims=True)
    if isinstance(manifold, Spd):
        k = manifold.n
        g = rng.normal(scale=0.7, size=shape + (k, k))
        s = 0.5 * (g + np.swapaxes(g, -1, -2))
        w, q = np.linalg.eigh(s)
        return (q * np.exp(w)[..., None, :]) @ np.swapaxes(q, -1, -2)
    raise ValueError(manifold)


def random_tangents(manifold, rng, base, sigma=1.0):
    return manifold.random_tangent(base, sigma, rng)


def clustered_vertex_function(manifold, rng, n, spread=0.3, mask=None):
    """Values inside a geodesic ball of radius ~spread: always admissible."""
    center = random_point(manifold, rng)
    centers = np.broadcast_to(center, (n,) + manifold.point_shape)
    xi = manifold.random_tangent(centers, spread / np.sqrt(manifold.intrinsic_dim), rng)
    vals = manifold.exp(centers, xi)
    return VertexFunction(manifold, vals, mask)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


ALL_MANIFOLDS = [Euclidean(3), Circle(), Sphere2(), Spd(3)]
