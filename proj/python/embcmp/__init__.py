"""Python bindings for the embcmp network-embedding comparison core."""

import json as _json

from . import _embcmp
from ._embcmp import (
    ComputeError,
    DataError,
    Graph,
    communities,
    largest_component,
    load_edge_list,
    metric_keys,
    ndcg,
    node_metrics,
    trustworthiness,
)

__all__ = [
    "ComputeError",
    "DataError",
    "Graph",
    "communities",
    "embed",
    "generate",
    "largest_component",
    "load_edge_list",
    "metric_keys",
    "ndcg",
    "node_metrics",
    "space_id",
    "trustworthiness",
    "tsne",
]


def _dump(params):
    return _json.dumps(params or {})


def generate(**spec):
    """Synthetic graph from spec keys (kind, n, ba_m, communities, intra_p, ...)."""
    return _embcmp.generate(_dump(spec))


def embed(graph, model, **params):
    """N x d float32 embedding; params use the service's embed keys."""
    return _embcmp.embed(graph, model, _dump(params))


def space_id(model, **params):
    return _embcmp.space_id(model, _dump(params))


def tsne(x, **params):
    """Exact t-SNE of the rows of x. Returns {coords, iteration, kl}."""
    return _embcmp.tsne(x, _dump(params))
