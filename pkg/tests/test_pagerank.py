import io
import json

import numpy as np
import pytest

from riskrank import netmodel, pagerank
from riskrank.errors import ValidationError
from helpers import flat_vector, random_network_records
from oracles import dense_pagerank, dense_supra


def test_influence_vector_placement(fixture_records):
    net = netmodel.build_network(fixture_records)
    spec = pagerank.InfluenceSpec(frozenset({1, 5}))
    v = pagerank.influence_vector(net, spec)
    nz = np.nonzero(v)[0]
    np.testing.assert_array_equal(nz, [1, 5, 13, 17])
    np.testing.assert_allclose(v[nz], 0.25)
    assert v.sum() == pytest.approx(1.0, abs=1e-15)


def test_influence_spec_validation(fixture_records):
    net = netmodel.build_network(fixture_records)
    with pytest.raises(ValidationError):
        pagerank.InfluenceSpec(frozenset())
    with pytest.raises(ValidationError):
        pagerank.InfluenceSpec(frozenset({-1}))
    with pytest.raises(ValidationError):
        pagerank.influence_vector(net, pagerank.InfluenceSpec(frozenset({7})))


def test_params_validation():
    with pytest.raises(ValidationError):
        pagerank.PageRankParams(restart_probability=1.0)
    with pytest.raises(ValidationError):
        pagerank.PageRankParams(restart_probability=0.0)
    with pytest.raises(ValidationError):
        pagerank.PageRankParams(tolerance=0.0)
    with pytest.raises(ValidationError):
        pagerank.PageRankParams(max_iterations=0)


def test_scores_sum_to_one_and_converge(fixture_records):
    net = netmodel.build_network(fixture_records)
    spec = pagerank.InfluenceSpec(frozenset({1, 5}))
    result = pagerank.personalized_pagerank(net, spec)
    assert result.converged
    assert result.final_residual < 1e-9
    assert result.node_scores.sum() == pytest.approx(1.0, abs=1e-9)
    assert result.per_layer_scores.shape == (12, 2)
    np.testing.assert_allclose(
        result.per_layer_scores.sum(axis=1), result.node_scores
    )


def test_unpersonalized_uses_uniform_restart(fixture_records):
    net = netmodel.build_network(fixture_records)
    result = pagerank.personalized_pagerank(net, None)
    assert result.converged
    assert result.node_scores.sum() == pytest.approx(1.0, abs=1e-9)
    # symmetric loans (L1, L3 share district and product) tie exactly
    assert result.node_scores[0] == pytest.approx(result.node_scores[2], abs=1e-12)


def test_hitting_iteration_cap_reports_not_converged(fixture_records):
    net = netmodel.build_network(fixture_records)
    spec = pagerank.InfluenceSpec(frozenset({1}))
    result = pagerank.personalized_pagerank(
        net, spec, pagerank.PageRankParams(max_iterations=2)
    )
    assert not result.converged
    assert result.iterations == 2


def test_deterministic_across_runs(fixture_records):
    net = netmodel.build_network(fixture_records)
    spec = pagerank.InfluenceSpec(frozenset({1, 5}))
    a = pagerank.personalized_pagerank(net, spec)
    b = pagerank.personalized_pagerank(net, spec)
    np.testing.assert_array_equal(a.node_scores, b.node_scores)
    assert a.iterations == b.iterations


def test_matches_dense_oracle_on_random_networks():
    rng = np.random.default_rng(40)
    for _ in range(20):
        records, specs, attrs, influence = random_network_records(rng)
        net = netmodel.build_network(records, specs)
        result = pagerank.personalized_pagerank(
            net, pagerank.InfluenceSpec(influence)
        )
        assert result.converged

        a, _, n = dense_supra(records, attrs)
        flat_influence = [i + layer * n for i in influence for layer in range(len(attrs))]
        expected = dense_pagerank(a, flat_influence)
        assert np.abs(flat_vector(result) - expected).sum() < 1e-8


def test_restart_probability_changes_result(fixture_records):
    net = netmodel.build_network(fixture_records)
    spec = pagerank.InfluenceSpec(frozenset({1}))
    near = pagerank.personalized_pagerank(
        net, spec, pagerank.PageRankParams(restart_probability=0.5)
    )
    far = pagerank.personalized_pagerank(
        net, spec, pagerank.PageRankParams(restart_probability=0.99)
    )
    # low restart keeps more mass near the teleport targets
    assert near.node_scores[1] > far.node_scores[1]


def test_score_exports(fixture_records):
    net = netmodel.build_network(fixture_records)
    spec = pagerank.InfluenceSpec(frozenset({1, 5}))
    result = pagerank.personalized_pagerank(net, spec)

    csv_buf = io.StringIO()
    pagerank.write_scores_csv(net, result, csv_buf)
    lines = csv_buf.getvalue().splitlines()
    assert lines[0] == "node_label,node_kind,layer_or_sum,score"
    assert len(lines) == 1 + 12 * 3  # district, product, sum per node

    json_buf = io.StringIO()
    pagerank.write_scores_json(net, result, json_buf)
    payload = json.loads(json_buf.getvalue())
    assert payload["converged"] is True
    assert len(payload["scores"]) == 12 * 3
    total = sum(
        row["score"] for row in payload["scores"] if row["layer_or_sum"] == "sum"
    )
    assert total == pytest.approx(1.0, abs=1e-9)
