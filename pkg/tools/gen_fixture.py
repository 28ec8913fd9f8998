"""Generate and verify the bundled corpus fixtures.

Two corpora are produced:

corpus_water11.json
    11 presentations across 6 domains, engineered so the mock pipeline
    extracts exactly 89 viewpoints and the cumulative flow ratio dips exactly
    at steps 6 and 10 while trending upward overall. Construction: 8 token
    "chains" drift through the 9 non-dip presentations; consecutive chain
    members share 7 of their 9 stream tokens (Jaccard >= 0.5, flow fires),
    members two or more steps apart share at most 5 (no flow). Presentations
    7 and 11 use fully disjoint vocabulary, so they add nodes but no edges.

corpus_planted.json
    4 presentations across 3 domains where the WT viewpoints are mutually
    near-identical across presentations: WT must top both the within-domain
    similarity ranking and the within-domain flow fraction ranking.

The script regenerates src/converge/fixtures/*.json and then checks every
engineered property by running the real pipeline code.
"""
from __future__ import annotations

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from converge.corpus import Corpus, Domain, Presentation, corpus_from_payload  # noqa: E402
from converge.extraction import ExtractionLimits, audit_grounding, extract_corpus_viewpoints, infer_flows  # noqa: E402
from converge.jsonio import write_canonical  # noqa: E402
from converge.providers import LABEL_STEMS, MockProvider, tokenize  # noqa: E402
from converge.temporal import build_cumulative_graphs, ratio_series, trend_report  # noqa: E402

FIXTURE_DIR = REPO / "src" / "converge" / "fixtures"

DOMAINS = [
    {"code": "PSS", "name": "Process and Systems Science",
     "keywords": ["simulation", "systems modeling", "optimization", "control theory"]},
    {"code": "WL", "name": "Water Law",
     "keywords": ["water policy", "regulation", "rights", "governance"]},
    {"code": "DS", "name": "Data Science",
     "keywords": ["machine learning", "data pipelines", "statistics", "visualization"]},
    {"code": "CR", "name": "Community Research",
     "keywords": ["community engagement", "stakeholders", "field surveys", "outreach"]},
    {"code": "SSH", "name": "Social Sciences and Humanities",
     "keywords": ["ethics", "culture", "behavior", "society"]},
    {"code": "WT", "name": "Water Technology",
     "keywords": ["filtration", "desalination", "membranes", "sensors"]},
]

# presentation roster: (id, presenter, domain)
ROSTER = [
    ("p01", "Starfire", "PSS"),
    ("p02", "Brook", "WL"),
    ("p03", "Pixel", "DS"),
    ("p04", "Harbor", "CR"),
    ("p05", "Cascade", "SSH"),
    ("p06", "Summit", "PSS"),
    ("p07", "Echo", "WT"),
    ("p08", "Vector", "DS"),
    ("p09", "Delta", "SSH"),
    ("p10", "Mesa", "CR"),
    ("p11", "Forge", "WT"),
]

CHAIN_MEMBERS = [0, 1, 2, 3, 4, 5, 7, 8, 9]  # roster indices hosting the chains
LABEL_WORD = {"N": "needs", "A": "approach", "B": "benefits", "C": "existing"}
CHAIN_STEMS = ["alder", "basalt", "cedar", "dune", "ember", "fjord", "garnet", "heath"]
CHAIN_PATTERNS = [  # NABC label of chain c at member position m
    "NNNNNNNNN",
    "NANANANAN",
    "AAAAAAAAA",
    "ABABABABA",
    "BBBBBBBBB",
    "BCBCBCBCB",
    "CCCCCCCCC",
    "CNCNCNCNC",
]

ALL_STEMS = [stem for stems in LABEL_STEMS.values() for stem in stems]


def assert_clean(words: list[str], context: str) -> None:
    """No accidental rule-stem hits outside the intended keyword."""
    for word in words:
        for token in tokenize(word):
            hits = [stem for stem in ALL_STEMS if token.startswith(stem)]
            if hits:
                raise SystemExit(f"{context}: token {token!r} matches stems {hits}")


def chain_sentence(chain: int, member: int) -> str:
    label = CHAIN_PATTERNS[chain][member]
    stream = [f"{CHAIN_STEMS[chain]}{i:02d}" for i in range(2 * member, 2 * member + 9)]
    assert_clean(stream, f"chain {chain} member {member}")
    return f"{LABEL_WORD[label].capitalize()} {' '.join(stream)}."


def solo_sentence(stem: str, block: int, label: str) -> str:
    tokens = [f"{stem}{i:02d}" for i in range(9 * block, 9 * block + 9)]
    assert_clean(tokens, f"solo {stem} block {block}")
    return f"{LABEL_WORD[label].capitalize()} {' '.join(tokens)}."


FILLERS = [
    "Thanks everyone for joining session {n} today.",
    "Questions are welcome at the end.",
]


def check_filler(sentence: str) -> str:
    assert_clean(sentence.split(), f"filler {sentence!r}")
    return sentence


def build_water11() -> Corpus:
    transcripts: dict[str, list[str]] = {pid: [] for pid, _, _ in ROSTER}
    for n, (pid, _, _) in enumerate(ROSTER, start=1):
        transcripts[pid].append(check_filler(FILLERS[0].format(n=n)))

    for member, roster_idx in enumerate(CHAIN_MEMBERS):
        pid = ROSTER[roster_idx][0]
        for chain in range(len(CHAIN_STEMS)):
            transcripts[pid].append(chain_sentence(chain, member))

    # presentation 7: ten viewpoints, vocabulary disjoint from every chain
    for block, label in enumerate("NABCNABCNA"):
        transcripts["p07"].append(solo_sentence("tide", block, label))
    # presentation 11: seven viewpoints, again fully disjoint
    for block, label in enumerate("NABCNAB"):
        transcripts["p11"].append(solo_sentence("glow", block, label))

    for pid in transcripts:
        transcripts[pid].append(check_filler(FILLERS[1]))

    payload = {
        "domains": DOMAINS,
        "presentations": [
            {
                "id": pid,
                "order_index": order,
                "presenter": presenter,
                "domain_code": domain,
                "transcript": " ".join(transcripts[pid]),
            }
            for order, (pid, presenter, domain) in enumerate(ROSTER, start=1)
        ],
        "metadata": {
            "collection": "synthetic interdisciplinary water-research series",
            "generator": "tools/gen_fixture.py",
        },
    }
    return corpus_from_payload(payload)


def build_planted() -> Corpus:
    shared = [f"reef{i:02d}" for i in range(8)]
    assert_clean(shared, "planted shared")
    wt_sentences = {
        "q1": [
            f"Needs {' '.join(shared)} mossy.",
            f"Needs {' '.join(shared)} briny.",
        ],
        "q3": [
            f"Needs {' '.join(shared)} silty.",
            f"Needs {' '.join(shared)} foamy.",
        ],
    }
    ds_sentences = [
        solo_sentence("quartz", 0, "A"),
        solo_sentence("quartz", 1, "B"),
    ]
    cr_sentences = [
        solo_sentence("umber", 0, "C"),
        solo_sentence("umber", 1, "A"),
    ]
    for group in wt_sentences.values():
        for sentence in group:
            assert_clean([w for w in sentence.split() if w.lower() != "needs"], "planted WT")

    presentations = [
        ("q1", "Rill", "WT", wt_sentences["q1"]),
        ("q2", "Byte", "DS", ds_sentences),
        ("q3", "Wake", "WT", wt_sentences["q3"]),
        ("q4", "Lane", "CR", cr_sentences),
    ]
    payload = {
        "domains": [d for d in DOMAINS if d["code"] in ("WT", "DS", "CR")],
        "presentations": [
            {
                "id": pid,
                "order_index": order,
                "presenter": presenter,
                "domain_code": domain,
                "transcript": " ".join(
                    [check_filler(FILLERS[0].format(n=order))] + sentences
                ),
            }
            for order, (pid, presenter, domain, sentences) in enumerate(presentations, start=1)
        ],
        "metadata": {
            "collection": "planted within-domain similarity corpus",
            "generator": "tools/gen_fixture.py",
        },
    }
    return corpus_from_payload(payload)


def verify_water11(corpus: Corpus) -> None:
    limits = ExtractionLimits()
    provider = MockProvider(seed=42)
    viewpoints = extract_corpus_viewpoints(corpus, provider, limits)
    counts = [len(viewpoints[p.id]) for p in corpus.presentations]
    expected_counts = [8, 8, 8, 8, 8, 8, 10, 8, 8, 8, 7]
    assert counts == expected_counts, f"viewpoint counts {counts}"
    assert sum(counts) == 89, f"total {sum(counts)}"
    assert audit_grounding(corpus, viewpoints) == []

    flows = infer_flows(corpus, viewpoints, provider, limits)
    assert len(flows) == 64, f"flow count {len(flows)}"
    per_presenter: dict[str, dict[str, int]] = {}
    for flow in flows:
        kinds = per_presenter.setdefault(flow.source.presenter, {})
        kinds[flow.kind] = kinds.get(flow.kind, 0) + 1
    for presenter, kinds in per_presenter.items():
        total = sum(kinds.values())
        assert total == 8, f"{presenter} sources {total} flows"
        assert kinds == {"within_category": 4, "cross_category": 4}, f"{presenter}: {kinds}"

    graphs = build_cumulative_graphs(corpus, viewpoints, flows)
    series = ratio_series(graphs, initial_nodes=counts[0])
    nodes = [e.nodes for e in series.entries]
    edges = [e.edges for e in series.entries]
    assert nodes == [16, 24, 32, 40, 48, 58, 66, 74, 82, 89], nodes
    assert edges == [8, 16, 24, 32, 40, 40, 48, 56, 64, 64], edges
    by_order = {p.order_index: p.id for p in corpus.presentations}
    trend = trend_report(series, by_order)
    assert trend.decreases == (6, 10), trend.decreases
    assert trend.slope > 0, trend.slope
    assert trend.responsible == {6: "p07", 10: "p11"}, trend.responsible
    # the later dip is the smaller one
    deltas = dict(zip([e.t for e in series.entries][1:], trend.deltas))
    assert abs(deltas[10]) < abs(deltas[6]), deltas
    print(f"water11 ok: 89 viewpoints, 64 flows, dips at 6 and 10, slope {trend.slope:+.4f}")


def verify_planted(corpus: Corpus) -> None:
    from converge.pipeline import PipelineConfig, build_consistency_payload, run_pipeline

    limits = ExtractionLimits()
    provider = MockProvider(seed=42)
    viewpoints = extract_corpus_viewpoints(corpus, provider, limits)
    counts = [len(viewpoints[p.id]) for p in corpus.presentations]
    assert counts == [2, 2, 2, 2], counts
    flows = infer_flows(corpus, viewpoints, provider, limits)
    assert len(flows) == 4, [f"{f.source.viewpoint_id}->{f.target.viewpoint_id}" for f in flows]
    assert all(f.source.viewpoint_id.startswith("WT") for f in flows)
    assert all(f.target.viewpoint_id.startswith("WT") for f in flows)

    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "corpus.json"
        write_canonical(corpus_path, corpus.to_payload())
        bundle = run_pipeline(PipelineConfig.make(seed=42), corpus_path, Path(tmp) / "bundle")
        report = build_consistency_payload(bundle)
    assert report["top_by_similarity"] == "WT", report["within_domain_similarity"]
    assert report["top_by_flows"] == "WT", report["within_domain_flow_fraction"]
    assert report["aligned"] is True
    print(
        "planted ok: WT tops similarity "
        f"({report['within_domain_similarity']}) and flow fraction "
        f"({report['within_domain_flow_fraction']})"
    )


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    water11 = build_water11()
    planted = build_planted()
    verify_water11(water11)
    verify_planted(planted)
    write_canonical(FIXTURE_DIR / "corpus_water11.json", water11.to_payload())
    write_canonical(FIXTURE_DIR / "corpus_planted.json", planted.to_payload())
    print(f"fixtures written to {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
