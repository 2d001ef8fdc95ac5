"""Shared generators for randomized tests."""

from types import SimpleNamespace

LAYER_POOL = ("district", "product", "channel")


def random_network_records(rng, max_layers=3):
    """A random small record batch plus its layer specs and influence set.

    Returns (records, layer_specs, layer_attrs, influence_set).  Records
    are plain namespaces so extra layers beyond district/product are just
    attributes; total node count stays small (<= 30).
    """
    n_layers = int(rng.integers(2, max_layers + 1))
    attrs = LAYER_POOL[:n_layers]
    n_loans = int(rng.integers(3, 13))
    pools = {attr: [f"{attr[0].upper()}{i}" for i in range(int(rng.integers(1, 5)))]
             for attr in attrs}
    records = []
    for pos in range(n_loans):
        fields = {attr: pools[attr][int(rng.integers(0, len(pools[attr])))]
                  for attr in attrs}
        records.append(SimpleNamespace(loan_id=f"L{pos}", **fields))
    n_influence = int(rng.integers(1, n_loans + 1))
    influence = frozenset(
        int(i) for i in rng.choice(n_loans, size=n_influence, replace=False)
    )
    layer_specs = tuple((attr, attr) for attr in attrs)
    return records, layer_specs, attrs, influence


def flat_vector(result):
    """Library result back to the flat (N*L,) stationary vector."""
    return result.per_layer_scores.T.reshape(-1)
