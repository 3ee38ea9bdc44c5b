"""Command-line entry points.

Subcommands:

* ``run`` — produce timelines for every (topic, constraint) in the ground
  truth, in one of three modes: the full pipeline (``reacts``), the
  reflection-off ablation (``reacts_no_sr``), or the single-prompt
  concatenation ``baseline``.
* ``evaluate`` — score a directory of predicted timelines against ground
  truth and write a JSON report.
* ``significance`` — paired randomization test between two reports.
* ``mock-serve`` — serve scripted responses over HTTP for hermetic runs.

Exit codes: 0 success, 2 configuration/input error, 3 backend failure,
4 evaluation mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .corpus import CorpusError
from .evaluation import (
    EvaluationError,
    METRIC_NAMES,
    load_report,
    save_report,
    significance_from_reports,
)
from .gateway import (
    GatewayError,
    GenerationConfig,
    HttpBackend,
    LLMGateway,
    MockBackend,
)
from .pipeline import MODES, PipelineError, RunConfig, evaluate_run, run
from .prompts import TemplateError, load_few_shot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_EVAL = 4

_DEFAULT_ENDPOINT = "http://127.0.0.1:8000/v1"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reacts",
        description="Constrained timeline summarization pipeline and evaluator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="generate timelines for a query set")
    p_run.add_argument("--mode", choices=MODES, default="reacts")
    p_run.add_argument("--pool", required=True, type=Path, help="article pool JSONL")
    p_run.add_argument("--gold", required=True, type=Path, help="ground-truth JSON")
    p_run.add_argument("--topic", help="only run this topic")
    p_run.add_argument("--constraint", help="only run this constraint")
    p_run.add_argument("--l", type=int, dest="l", help="timeline length override")
    p_run.add_argument("--k", type=int, dest="k", help="sentences per entry override")
    p_run.add_argument("--n", type=int, default=20, help="neighbors retrieved per summary")
    p_run.add_argument("--few-shot", type=Path, help="JSON file of demonstration blocks")
    p_run.add_argument("--seed", type=int, help="sampling seed (required for baseline)")
    p_run.add_argument(
        "--endpoint",
        default=os.environ.get("REACTS_ENDPOINT", _DEFAULT_ENDPOINT),
        help="chat/embeddings base URL, or mock://<script.json> for canned responses",
    )
    p_run.add_argument("--embed-endpoint", help="separate embeddings base URL")
    p_run.add_argument("--model", default="default")
    p_run.add_argument("--temperature", type=float, default=0.0)
    p_run.add_argument("--top-p", type=float, default=1.0)
    p_run.add_argument("--out", required=True, type=Path, help="output directory")

    p_eval = sub.add_parser("evaluate", help="score predictions against ground truth")
    p_eval.add_argument("--pred", required=True, type=Path, help="prediction directory")
    p_eval.add_argument("--gold", required=True, type=Path)
    p_eval.add_argument("--out", type=Path, help="report path (default: <pred>/report.json)")

    p_sig = sub.add_parser("significance", help="paired randomization test")
    p_sig.add_argument("--a", required=True, type=Path, help="report JSON for system A")
    p_sig.add_argument("--b", required=True, type=Path, help="report JSON for system B")
    p_sig.add_argument("--metric", required=True, choices=METRIC_NAMES)
    p_sig.add_argument("--trials", type=int, default=100)
    p_sig.add_argument("--alpha", type=float, default=0.05)
    p_sig.add_argument("--seed", type=int, required=True)

    p_mock = sub.add_parser("mock-serve", help="serve scripted responses over HTTP")
    p_mock.add_argument("--script", required=True, type=Path, help="mock script JSON")
    p_mock.add_argument("--host", default="127.0.0.1")
    p_mock.add_argument("--port", type=int, default=0)

    return parser


def _make_gateway(args: argparse.Namespace) -> LLMGateway:
    endpoint: str = args.endpoint
    config = GenerationConfig(
        model_name=args.model,
        endpoint=endpoint,
        embed_endpoint=args.embed_endpoint,
        api_key=os.environ.get("REACTS_API_KEY"),
        temperature=args.temperature,
        top_p=args.top_p,
    )
    if endpoint.startswith("mock://"):
        backend = MockBackend.from_script(endpoint[len("mock://"):])
    else:
        backend = HttpBackend()
    return LLMGateway(backend, config, load_few_shot(args.few_shot))


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        pool_path=args.pool,
        gold_path=args.gold,
        out_dir=args.out,
        mode=args.mode,
        topic=args.topic,
        constraint=args.constraint,
        l_override=args.l,
        k_override=args.k,
        n=args.n,
        seed=args.seed,
        few_shot_path=args.few_shot,
        extra_manifest={
            "model": args.model,
            "endpoint": args.endpoint,
            "temperature": args.temperature,
            "top_p": args.top_p,
        },
    )
    gateway = _make_gateway(args)
    results = run(cfg, gateway)
    print(f"wrote {len(results)} timeline(s) to {args.out}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    report = evaluate_run(args.pred, args.gold)
    out = args.out or (args.pred / "report.json")
    save_report(report, out)
    for metric in METRIC_NAMES:
        score = report.macro[metric]
        print(
            f"{metric}: P={score.precision:.4f} R={score.recall:.4f} F1={score.f1:.4f}"
        )
    print(f"report written to {out}")
    return EXIT_OK


def _cmd_significance(args: argparse.Namespace) -> int:
    result = significance_from_reports(
        load_report(args.a),
        load_report(args.b),
        metric=args.metric,
        trials=args.trials,
        alpha=args.alpha,
        seed=args.seed,
    )
    verdict = "significant" if result.significant else "not significant"
    print(
        f"{result.metric}: observed diff {result.observed_diff:+.6f}, "
        f"p={result.p_value:.6f} over {result.trials} trials -> {verdict} "
        f"at alpha={result.alpha}"
    )
    return EXIT_OK


def _cmd_mock_serve(args: argparse.Namespace) -> int:
    from .mockserver import make_server  # deferred: only this command serves

    server = make_server(args.script, args.host, args.port)
    host, port = server.server_address[0], server.server_address[1]
    print(f"serving mock backend at http://{host}:{port}/v1", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_CONFIG if exc.code else EXIT_OK
    handlers = {
        "run": _cmd_run,
        "evaluate": _cmd_evaluate,
        "significance": _cmd_significance,
        "mock-serve": _cmd_mock_serve,
    }
    try:
        return handlers[args.command](args)
    except GatewayError as exc:
        print(f"backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except EvaluationError as exc:
        print(f"evaluation mismatch: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except (
        PipelineError,
        CorpusError,
        TemplateError,
        FileNotFoundError,
        NotADirectoryError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
