import math

import numpy as np
import pytest

from converge.corpus import Domain
from converge.extraction import Viewpoint
from converge.influence import (
    DomainGraph,
    InfluenceError,
    build_domain_graph,
    build_ec_matrix,
    domain_affinity,
    ec_matrix_from_payload,
    eigenvector_centrality,
    power_iteration,
    render_ec_table,
    _observed_threshold,
)
from converge.providers import MockProvider
from converge.semantics import MockEmbedding


def view(summary, vid="AA-X-1"):
    return Viewpoint(id=vid, presentation_id="p1", summary=summary, nabc="N",
                     quote=summary, index=1)


def test_domain_affinity_embedding_identity():
    backend = MockEmbedding(seed=42)
    dom = Domain(code="WT", name="Water Tech", keywords=("water",))
    assert domain_affinity(view("water"), dom, backend=backend) == pytest.approx(1.0)


def test_domain_affinity_provider_path_and_bounds():
    dom = Domain(code="WT", name="Water Tech", keywords=("water", "pump"))
    score = domain_affinity(view("water things"), dom, provider=MockProvider())
    assert score == pytest.approx(0.5)  # one of two keyword tokens present

    class BadProvider:
        def complete(self, instruction, input_text):
            return '{"score": 1.5}'

    with pytest.raises(InfluenceError, match="outside"):
        domain_affinity(view("x"), dom, provider=BadProvider())
    with pytest.raises(InfluenceError, match="required"):
        domain_affinity(view("x"), dom)


def make_domains():
    return (
        Domain(code="AA", name="Alpha", keywords=("alder",)),
        Domain(code="BB", name="Beta", keywords=("basalt",)),
        Domain(code="CC", name="Gamma", keywords=("cedar",)),
    )


def test_build_domain_graph_star_counts_with_explicit_theta():
    domains = make_domains()
    views = [view("alder basalt", "AA-X-1"), view("basalt cedar", "AA-X-2")]
    graph = build_domain_graph(views, "p1", "AA", domains,
                               provider=MockProvider(), theta_dom=0.9)
    # provider affinity = keyword-token fraction: BB scores 1.0 twice, CC once
    assert graph.adjacency[0, 1] == 2 and graph.adjacency[1, 0] == 2
    assert graph.adjacency[0, 2] == 1
    assert graph.adjacency[1, 2] == 0  # star: no edge between non-presenter domains
    assert not graph.degenerate


def test_build_domain_graph_embedding_default_threshold_matches_direct_count():
    domains = make_domains()
    backend = MockEmbedding(seed=42)
    views = [view("alder stream", "AA-X-1"), view("cedar bark", "AA-X-2")]
    graph = build_domain_graph(views, "p1", "AA", domains, backend=backend)
    others = [d for d in domains if d.code != "AA"]
    pooled = [domain_affinity(v, d, backend=backend) for d in others for v in views]
    theta = _observed_threshold(pooled)
    for d in others:
        count = sum(
            1 for v in views if domain_affinity(v, d, backend=backend) >= theta
        )
        j = graph.codes.index(d.code)
        assert graph.adjacency[graph.codes.index("AA"), j] == count


def test_build_domain_graph_requires_viewpoints():
    with pytest.raises(InfluenceError, match="no viewpoints"):
        build_domain_graph([], "p1", "AA", make_domains(), provider=MockProvider())


def test_domain_graph_invariants():
    codes_kwargs = dict(presentation_id="p1", presenter_domain="AA", codes=("AA", "BB"))
    with pytest.raises(InfluenceError, match="symmetric"):
        DomainGraph(adjacency=np.array([[0, 1], [2, 0]]), **codes_kwargs)
    with pytest.raises(InfluenceError, match="non-negative"):
        DomainGraph(adjacency=np.array([[0, -1], [-1, 0]]), **codes_kwargs)
    with pytest.raises(InfluenceError, match="diagonal"):
        DomainGraph(adjacency=np.array([[1, 0], [0, 1]]), **codes_kwargs)
    with pytest.raises(InfluenceError, match="not registered"):
        DomainGraph(presentation_id="p1", presenter_domain="ZZ", codes=("AA", "BB"),
                    adjacency=np.zeros((2, 2), dtype=int))
    assert DomainGraph(adjacency=np.zeros((2, 2), dtype=int), **codes_kwargs).degenerate


def test_power_iteration_star_closed_form():
    # star with leaf weights 3,3,2,2,1: eigenvalue sqrt(27), leaves w/sqrt(27)
    weights = [3, 3, 2, 2, 1]
    n = len(weights) + 1
    adj = np.zeros((n, n))
    for i, w in enumerate(weights):
        adj[0, i + 1] = adj[i + 1, 0] = w
    vec, value, _ = power_iteration(adj)
    vec = np.abs(vec) / np.abs(vec).max()
    assert value == pytest.approx(math.sqrt(27), abs=1e-6)
    expected = [1.0] + [w / math.sqrt(27) for w in weights]
    assert vec == pytest.approx(expected, abs=1e-6)


def test_power_iteration_matches_dense_solver_sample():
    for case in range(10):
        rng = np.random.default_rng(500 + case)
        n = int(rng.integers(2, 11))
        m = rng.uniform(0.0, 1.0, size=(n, n))
        adj = (m + m.T) / 2.0
        np.fill_diagonal(adj, 0.0)
        vec, value, _ = power_iteration(adj, max_iter=200_000)
        eigenvalues, eigenvectors = np.linalg.eigh(adj)
        assert value == pytest.approx(float(eigenvalues[-1]), abs=1e-8)
        dense = eigenvectors[:, -1]
        align = min(np.abs(vec - dense).max(), np.abs(vec + dense).max())
        assert align < 1e-8


def test_power_iteration_rejects_zero_matrix():
    with pytest.raises(InfluenceError, match="no dominant"):
        power_iteration(np.zeros((3, 3)))


def test_eigenvector_centrality_component_restriction():
    # BB unreachable from presenter AA; scores: AA and CC in a 2-node component
    adjacency = np.array([[0, 0, 2], [0, 0, 0], [2, 0, 0]])
    graph = DomainGraph(presentation_id="p1", presenter_domain="AA",
                        codes=("AA", "BB", "CC"), adjacency=adjacency)
    vector = eigenvector_centrality(graph)
    assert vector.values == {"AA": 1.0, "BB": 0.0, "CC": pytest.approx(1.0)}
    assert vector.dominant_eigenvalue == pytest.approx(2.0)


def test_eigenvector_centrality_rejects_degenerate():
    graph = DomainGraph(presentation_id="p1", presenter_domain="AA",
                        codes=("AA", "BB"), adjacency=np.zeros((2, 2), dtype=int))
    with pytest.raises(InfluenceError, match="degenerate"):
        eigenvector_centrality(graph)


def make_centrality(presenter, values):
    from converge.influence import CentralityVector

    return CentralityVector(presenter_domain=presenter, presentation_id="p",
                            values=values, dominant_eigenvalue=1.0)


def test_build_ec_matrix_hand_mean():
    codes = ("AA", "BB", "CC")
    first = make_centrality("AA", {"AA": 1.0, "BB": 0.5, "CC": 0.0})
    second = make_centrality("AA", {"AA": 1.0, "BB": 0.3, "CC": 0.2})
    matrix = build_ec_matrix([first, second], codes)
    assert matrix.cell("AA", "BB") == pytest.approx(0.4)
    assert matrix.cell("AA", "CC") == pytest.approx(0.1)
    assert matrix.cell("AA", "AA") == 1.0
    assert matrix.cell("BB", "BB") == 1.0  # diagonal holds even for absent rows
    assert matrix.cell("BB", "AA") is None
    assert matrix.counts == {"AA": 2}


def test_ec_matrix_payload_and_text_render():
    codes = ("AA", "BB")
    matrix = build_ec_matrix([make_centrality("AA", {"AA": 1.0, "BB": 0.25})], codes)
    payload = matrix.to_payload()
    assert payload["cells"][0] == [1.0, 0.25]
    assert payload["cells"][1] == [None, 1.0]
    again = ec_matrix_from_payload(payload)
    assert again.cell("AA", "BB") == pytest.approx(0.25)
    text = render_ec_table(matrix)
    lines = text.splitlines()
    assert lines[0].split() == ["AA", "BB"]
    assert "0.250" in lines[1]
    assert "-" in lines[2]  # BB never presented


def test_build_ec_matrix_rejects_empty_and_out_of_range():
    with pytest.raises(InfluenceError, match="at least one"):
        build_ec_matrix([], ("AA",))
    bad = make_centrality("AA", {"AA": 1.0, "BB": 1.5})
    with pytest.raises(InfluenceError, match="outside"):
        build_ec_matrix([bad], ("AA", "BB"))
