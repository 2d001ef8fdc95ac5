"""Personalized random-walk scoring on the flattened multilayer network.

The walker follows the column-normalized supra adjacency with probability
r and teleports with probability 1 - r.  Teleports land uniformly over
all (node, layer) positions, or, in the personalized variant, uniformly
over the layer copies of a chosen set of influence nodes (here: the
defaulted loans).  Mass sitting on dangling columns is re-routed to the
teleport vector every step, which keeps the iterate a probability vector;
specific nodes viewed from a foreign layer are isolated by construction,
so dangling columns always exist.

The solve is plain power iteration on the rank-1-corrected sparse
operator; the full dense walk matrix is never materialized.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import spmat
from .errors import ValidationError
from .netmodel import MultilayerNetwork, supra_adjacency


@dataclass(frozen=True)
class InfluenceSpec:
    """Teleport targets: indices of common nodes where influence originates."""

    influence_nodes: frozenset[int]
    description: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "influence_nodes", frozenset(self.influence_nodes)
        )
        if not self.influence_nodes:
            raise ValidationError("influence set must be non-empty")
        if any(i < 0 for i in self.influence_nodes):
            raise ValidationError("influence indices must be non-negative")


@dataclass(frozen=True)
class PageRankParams:
    restart_probability: float = 0.85
    tolerance: float = 1e-9       # L1 change per iteration
    max_iterations: int = 1000

    def __post_init__(self):
        if not 0.0 < self.restart_probability < 1.0:
            raise ValidationError("restart probability must be in (0, 1)")
        if self.tolerance <= 0.0:
            raise ValidationError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")


@dataclass(frozen=True)
class PageRankResult:
    per_layer_scores: np.ndarray  # (N, L): stationary probability per node copy
    node_scores: np.ndarray       # (N,): summed over layers
    iterations: int
    final_residual: float
    converged: bool


def influence_vector(net: MultilayerNetwork, spec: InfluenceSpec) -> np.ndarray:
    """Restart distribution for a personalized walk.

    Placing a 1 at every diagonal position of every block for each
    influence node makes the teleport target distribution uniform over
    the L copies of each such node: 1 / (|V_I| * L) at flat index
    i + layer * N, zero elsewhere.
    """
    if any(i >= net.n_common for i in spec.influence_nodes):
        raise ValidationError("influence indices must refer to common nodes")
    v = np.zeros(net.flat_size)
    weight = 1.0 / (len(spec.influence_nodes) * net.n_layers)
    for i in sorted(spec.influence_nodes):
        for layer in range(net.n_layers):
            v[net.flat_index(i, layer)] = weight
    return v


def uniform_vector(net: MultilayerNetwork) -> np.ndarray:
    return np.full(net.flat_size, 1.0 / net.flat_size)


def personalized_pagerank(
    net: MultilayerNetwork,
    spec: InfluenceSpec | None,
    params: PageRankParams = PageRankParams(),
) -> PageRankResult:
    """Stationary walker distribution, aggregated per node.

    ``spec=None`` runs the unpersonalized walk (uniform teleports).
    Returns converged=False instead of raising when the iteration cap is
    hit; callers decide whether that is fatal.
    """
    adjacency = supra_adjacency(net)
    transition, dangling, _ = spmat.column_normalize(
        adjacency, spmat.DanglingPolicy.UNIFORM_RESTART
    )
    v = uniform_vector(net) if spec is None else influence_vector(net, spec)

    r = params.restart_probability
    p = v.copy()
    residual = np.inf
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        dangling_mass = float(p[dangling].sum())
        p_next = r * spmat.matvec(transition, p)
        p_next += (r * dangling_mass + (1.0 - r)) * v
        residual = float(np.abs(p_next - p).sum())
        p = p_next
        if residual < params.tolerance:
            break

    n, layers = net.n_total, net.n_layers
    per_layer = p.reshape(layers, n).T.copy()
    node_scores = per_layer.sum(axis=1)
    return PageRankResult(
        per_layer_scores=per_layer,
        node_scores=node_scores,
        iterations=iterations,
        final_residual=residual,
        converged=residual < params.tolerance,
    )


def _score_rows(net: MultilayerNetwork, result: PageRankResult):
    for node in net.nodes:
        for layer, name in enumerate(net.layer_names):
            yield node.label, node.kind, name, result.per_layer_scores[node.index, layer]
        yield node.label, node.kind, "sum", result.node_scores[node.index]


def write_scores_csv(net: MultilayerNetwork, result: PageRankResult, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["node_label", "node_kind", "layer_or_sum", "score"])
    for label, kind, which, score in _score_rows(net, result):
        writer.writerow([label, kind, which, f"{score:.12g}"])


def write_scores_json(net: MultilayerNetwork, result: PageRankResult, stream) -> None:
    payload = {
        "iterations": result.iterations,
        "final_residual": float(f"{result.final_residual:.12g}"),
        "converged": result.converged,
        "scores": [
            {
                "node_label": label,
                "node_kind": kind,
                "layer_or_sum": which,
                "score": float(f"{score:.12g}"),
            }
            for label, kind, which, score in _score_rows(net, result)
        ],
    }
    json.dump(payload, stream, indent=2)
    stream.write("\n")
