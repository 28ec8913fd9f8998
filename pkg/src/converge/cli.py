"""Command-line entry point.

Verbs mirror the pipeline stages plus `run` (everything) and `serve` (HTTP
service over a finished bundle). Export verbs print canonical JSON to stdout
unless --out is given, so shell pipelines and the HTTP service see the same
bytes.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from converge import pipeline
from converge.corpus import CorpusError
from converge.jsonio import canonical_bytes, read_json
from converge.semantics import MODE_ABOVE, MODE_BELOW


def _emit(payload: dict, out: str | None) -> None:
    data = canonical_bytes(payload)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


def _config_from_args(args: argparse.Namespace) -> pipeline.PipelineConfig:
    return pipeline.PipelineConfig.make(
        seed=args.seed,
        provider=args.provider,
        percentile=args.percentile,
        theta_dom=args.theta_dom,
        flow_selector=args.flows,
        include_quote=args.include_quote,
    )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--provider", choices=("mock", "http"), default="mock")
    parser.add_argument("--percentile", type=float, default=90.0)
    parser.add_argument("--theta-dom", dest="theta_dom", type=float, default=None)
    parser.add_argument("--flows", choices=("all", "accepted"), default="all",
                        help="which flows feed the temporal stage")
    parser.add_argument("--include-quote", action="store_true",
                        help="embed summary plus quote instead of summary only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="converge",
        description="Research-convergence analytics over presentation transcripts.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus and start a bundle")
    p.add_argument("corpus")
    p.add_argument("--out", required=True, help="bundle directory")
    p.add_argument("--anonymize", help="presenter-to-pseudonym JSON map")
    _add_config_flags(p)

    p = sub.add_parser("extract", help="extract grounded viewpoints")
    p.add_argument("--bundle", required=True)

    p = sub.add_parser("flows", help="infer candidate opinion flows")
    p.add_argument("--bundle", required=True)

    p = sub.add_parser("graph", help="export a similarity/dissimilarity graph")
    p.add_argument("--bundle", required=True)
    p.add_argument("--percentile", type=float, default=None)
    p.add_argument("--mode", choices=("above", "below"), default="above")
    p.add_argument("--out")

    p = sub.add_parser("layout", help="recompute the 3D layout")
    p.add_argument("--bundle", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("influence", help="domain graphs, centrality, EC matrix")
    p.add_argument("--bundle", required=True)
    p.add_argument("--theta-dom", dest="theta_dom", type=float, default=None)

    p = sub.add_parser("temporal", help="export the ratio series and trend")
    p.add_argument("--bundle", required=True)
    p.add_argument("--flows", choices=("all", "accepted"), default=None)
    p.add_argument("--out")

    p = sub.add_parser("survey", help="export or import the review survey")
    survey_sub = p.add_subparsers(dest="survey_command", required=True)
    pe = survey_sub.add_parser("export")
    pe.add_argument("--bundle", required=True)
    pe.add_argument("--out")
    pi = survey_sub.add_parser("import")
    pi.add_argument("--bundle", required=True)
    pi.add_argument("--responses", required=True, help="JSON file with a responses[] array")

    p = sub.add_parser("report", help="cross-layer consistency report")
    report_sub = p.add_subparsers(dest="report_command", required=True)
    pc = report_sub.add_parser("consistency")
    pc.add_argument("--bundle", required=True)
    pc.add_argument("--out")

    p = sub.add_parser("serve", help="serve a bundle over HTTP")
    p.add_argument("--bundle", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--ui", help="static directory for the browser explorer")

    p = sub.add_parser("run", help="run the full pipeline into a bundle")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--anonymize")
    _add_config_flags(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except (CorpusError, pipeline.PipelineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "ingest":
        config = _config_from_args(args)
        mapping = Path(args.anonymize) if args.anonymize else None
        corpus = pipeline.stage_ingest(Path(args.corpus), Path(args.out), config, mapping)
        print(
            f"ingested {len(corpus.presentations)} presentations, "
            f"{len(corpus.domains)} domains -> {args.out}"
        )
        return 0

    if args.command == "extract":
        viewpoints = pipeline.stage_extract(Path(args.bundle))
        total = sum(len(v) for v in viewpoints.values())
        pipeline.write_manifest(Path(args.bundle))
        print(f"extracted {total} viewpoints")
        return 0

    if args.command == "flows":
        flows = pipeline.stage_flows(Path(args.bundle))
        pipeline.write_manifest(Path(args.bundle))
        print(f"inferred {len(flows)} flow candidates")
        return 0

    if args.command == "graph":
        bundle = Path(args.bundle)
        percentile = args.percentile
        if percentile is None:
            percentile = pipeline.load_config(bundle).percentile
        mode = MODE_ABOVE if args.mode == "above" else MODE_BELOW
        _emit(pipeline.build_graph_payload(bundle, percentile, mode), args.out)
        return 0

    if args.command == "layout":
        pipeline.stage_layout(Path(args.bundle), seed=args.seed)
        pipeline.write_manifest(Path(args.bundle))
        print("layout written")
        return 0

    if args.command == "influence":
        pipeline.stage_influence(Path(args.bundle), theta_dom=args.theta_dom)
        pipeline.write_manifest(Path(args.bundle))
        print("EC matrix written")
        return 0

    if args.command == "temporal":
        _emit(pipeline.build_ratio_payload(Path(args.bundle), args.flows), args.out)
        return 0

    if args.command == "survey" and args.survey_command == "export":
        bundle = Path(args.bundle)
        payload = read_json(bundle / "survey.json")
        _emit(payload, args.out)
        return 0

    if args.command == "survey" and args.survey_command == "import":
        responses = read_json(Path(args.responses))
        if isinstance(responses, dict):
            responses = responses.get("responses", [])
        stats = pipeline.ingest_survey_responses(Path(args.bundle), responses)
        print(
            f"reviewed {stats.reviewed}/{stats.total_items} items, "
            f"disagreement rate {stats.disagreement_rate:.2f}%"
        )
        return 0

    if args.command == "report":
        _emit(pipeline.build_consistency_payload(Path(args.bundle)), args.out)
        return 0

    if args.command == "serve":
        from converge.service import serve

        ui_dir = Path(args.ui) if args.ui else None
        serve(Path(args.bundle), host=args.host, port=args.port, ui_dir=ui_dir)
        return 0

    if args.command == "run":
        config = _config_from_args(args)
        mapping = Path(args.anonymize) if args.anonymize else None
        out = pipeline.run_pipeline(config, Path(args.corpus), Path(args.out), mapping)
        manifest = read_json(out / "manifest.json")
        print(f"bundle {manifest['bundle_fingerprint'][:12]} written to {out}")
        return 0

    raise pipeline.PipelineError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
