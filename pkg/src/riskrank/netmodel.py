"""Two-level network model: bipartite layers over shared common nodes.

Each record becomes one common node present in every layer.  Each layer
holds the distinct labels of one record attribute as specific nodes, with
an undirected unit edge from every record to its label.  Flattening gives
the (N*L) x (N*L) supra adjacency: layer adjacencies on the diagonal
blocks (over all N nodes, so foreign specific nodes sit isolated), and
partial identities coupling each common node to its copies elsewhere.

Node ordering is fixed: the N_c common nodes first (input order), then
specific nodes grouped by layer (first appearance).  Flat index of node i
in layer a is i + a * N; that convention is what makes the inter-layer
blocks plain partial identities.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import spmat
from .errors import ValidationError

# a layer is (name, selector); the selector is an attribute name or a
# callable extracting one label per record
LayerSpec = tuple[str, "str | Callable[[object], str]"]

DEFAULT_LAYERS: tuple[LayerSpec, ...] = (("district", "district"), ("product", "product"))


@dataclass(frozen=True)
class NodeRef:
    kind: str          # "common" | "specific"
    layer: int | None  # layer index for specific nodes, None for common
    label: str
    index: int         # position in the global node ordering


@dataclass(frozen=True)
class MultilayerNetwork:
    layer_names: tuple[str, ...]
    nodes: tuple[NodeRef, ...]
    n_common: int
    # per layer: (common index array, specific index array, weight array)
    intra_edges: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]

    @property
    def n_layers(self) -> int:
        return len(self.layer_names)

    @property
    def n_total(self) -> int:
        return len(self.nodes)

    @property
    def flat_size(self) -> int:
        return self.n_total * self.n_layers

    def flat_index(self, node: int, layer: int) -> int:
        return node + layer * self.n_total

    def node_layer(self, flat: int) -> tuple[int, int]:
        return flat % self.n_total, flat // self.n_total

    def specific_nodes(self, layer: int | None = None) -> list[NodeRef]:
        return [
            n for n in self.nodes
            if n.kind == "specific" and (layer is None or n.layer == layer)
        ]


def _selector_fn(selector) -> Callable[[object], str]:
    if callable(selector):
        return selector
    return lambda record: getattr(record, selector)


def build_network(records: Sequence, layer_specs: Sequence[LayerSpec] = DEFAULT_LAYERS) -> MultilayerNetwork:
    """Build the multilayer network for one batch of records.

    One common node per record, one specific node per distinct label per
    layer, one unit-weight edge per (record, layer).
    """
    records = list(records)
    if not records:
        raise ValidationError("cannot build a network from zero records")
    if not layer_specs:
        raise ValidationError("at least one layer is required")

    layer_names = tuple(name for name, _ in layer_specs)
    selectors = [_selector_fn(sel) for _, sel in layer_specs]
    n_common = len(records)

    # labels per layer in first-appearance order
    labels_per_layer: list[list[str]] = []
    label_ids: list[dict[str, int]] = []
    for name, selector in zip(layer_names, selectors):
        seen: dict[str, int] = {}
        order: list[str] = []
        for pos, record in enumerate(records):
            label = selector(record)
            if label is None or label == "":
                raise ValidationError(
                    f"record {pos} has no {name!r} label"
                )
            if label not in seen:
                seen[label] = len(seen)
                order.append(label)
        labels_per_layer.append(order)
        label_ids.append(seen)

    nodes: list[NodeRef] = []
    for pos, record in enumerate(records):
        nodes.append(NodeRef("common", None, _record_label(record, pos), pos))
    offset = n_common
    layer_offsets = []
    for layer, order in enumerate(labels_per_layer):
        layer_offsets.append(offset)
        for label in order:
            nodes.append(NodeRef("specific", layer, label, offset))
            offset += 1

    intra = []
    for layer, selector in enumerate(selectors):
        common_idx = np.arange(n_common, dtype=np.int64)
        specific_idx = np.array(
            [layer_offsets[layer] + label_ids[layer][selector(r)] for r in records],
            dtype=np.int64,
        )
        weights = np.ones(n_common)
        intra.append((common_idx, specific_idx, weights))

    return MultilayerNetwork(layer_names, tuple(nodes), n_common, tuple(intra))


def _record_label(record, pos: int) -> str:
    label = getattr(record, "loan_id", None)
    return label if label is not None else f"#{pos}"


def supra_adjacency(net: MultilayerNetwork) -> spmat.SparseMatrix:
    """Flatten the network to its (N*L) x (N*L) supra adjacency matrix.

    Diagonal block a holds layer a's symmetrized bipartite adjacency over
    all N nodes; every off-diagonal (a, b) block is the identity restricted
    to the first N_c indices.
    """
    n = net.n_total
    size = net.flat_size
    rows, cols, vals = [], [], []
    for layer, (common_idx, specific_idx, weights) in enumerate(net.intra_edges):
        base = layer * n
        rows.append(common_idx + base)
        cols.append(specific_idx + base)
        vals.append(weights)
        rows.append(specific_idx + base)
        cols.append(common_idx + base)
        vals.append(weights)
    couple = np.arange(net.n_common, dtype=np.int64)
    ones = np.ones(net.n_common)
    for a in range(net.n_layers):
        for b in range(net.n_layers):
            if a == b:
                continue
            rows.append(couple + a * n)
            cols.append(couple + b * n)
            vals.append(ones)
    triplets = (np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))
    return spmat.from_triplets(size, size, triplets)


def write_nodes_csv(net: MultilayerNetwork, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["index", "kind", "layer", "label"])
    for node in net.nodes:
        layer = "" if node.layer is None else net.layer_names[node.layer]
        writer.writerow([node.index, node.kind, layer, node.label])


def write_edges_csv(net: MultilayerNetwork, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["layer", "src_label", "dst_label", "weight"])
    for layer, (common_idx, specific_idx, weights) in enumerate(net.intra_edges):
        name = net.layer_names[layer]
        for c, s, w in zip(common_idx, specific_idx, weights):
            writer.writerow(
                [name, net.nodes[c].label, net.nodes[s].label, f"{w:.12g}"]
            )
