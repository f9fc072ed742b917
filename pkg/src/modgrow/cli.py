"""Operator entry points: learn, eval, run, library, cache."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import values as V
from .backends import SyntheticBackend
from .dsl import parse_program, validate_program
from .errors import DslSyntaxError, ModgrowError
from .executor import Environment, execute_program, trace_to_jsonl
from .gateway import LlmGateway
from .harness import datasets as ds
from .harness.evaluate import evaluate, run_ablation
from .registry import (
    ExecutionRegistry,
    builtin_library,
    load_library,
    save_library,
    signature_prompt_text,
)
from .replay_seed import SyntheticResponder, seed_learn_and_eval
from .sandbox import Limits
from .scene import ImageHandle, load_scene
from .synthesis import SynthesisConfig, run_synthesis


def _gateway_from_args(args) -> LlmGateway:
    mode = args.mode or os.environ.get("LLM_MODE", "replay")
    cache = getattr(args, "cache", None)
    if mode == "replay":
        if not cache or not os.path.exists(cache):
            raise ModgrowError(f"replay mode requires an existing cache file (got {cache!r})")
    if mode in ("live", "record"):
        if not os.environ.get("LLM_API_URL") or not os.environ.get("LLM_API_KEY"):
            raise ModgrowError(f"{mode} mode requires LLM_API_URL and LLM_API_KEY")
    return LlmGateway(mode=mode, cache_path=cache)


def _config_from_args(args) -> SynthesisConfig:
    return SynthesisConfig(
        eta=args.eta,
        k_candidates=args.k,
        r_repairs=args.repairs,
        limits=Limits(wall_time_ms=args.wall_time_ms),
        model_id=args.model or os.environ.get("LLM_MODEL_ID", "default-model"),
    )


def cmd_learn(args) -> int:
    try:
        cfg = _config_from_args(args)
        gateway = _gateway_from_args(args)
        lib = load_library(args.library) if args.library else builtin_library()
        train = ds.load_dataset(args.dataset)
    except (ModgrowError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        lib_after, report = run_synthesis(
            train, lib, gateway, SyntheticBackend(), cfg, origin_task=args.task or ""
        )
    except ModgrowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for name in report.accepted:
        rec = lib_after.records[name]
        print(f"accepted {name}  pass_rate={rec.pass_rate:.2f}  eta={rec.eta_at_acceptance:.2f}")
    for failure in report.failed:
        print(f"rejected {failure.name}  ({failure.reason})")
    for example_id, message in report.init_errors:
        print(f"warning: {example_id}: {message}", file=sys.stderr)
    if not report.proposals:
        print("0 proposals: the current library already covers the training split")

    out_dir = args.library if args.in_place else args.out
    if not out_dir:
        print("error: provide --out DIR (or --in-place to overwrite the input library)",
              file=sys.stderr)
        return 2
    save_library(lib_after, out_dir)
    print(f"library saved to {out_dir} ({len(lib_after)} modules)")
    if report.proposals and not report.accepted:
        return 1
    return 0


def _write_report(report, out_dir: str) -> None:
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    (root / "report.json").write_text(report.to_json(), encoding="utf-8")
    (root / "report.txt").write_text(report.render_table() + "\n", encoding="utf-8")


def cmd_eval(args) -> int:
    try:
        gateway = _gateway_from_args(args)
        lib = load_library(args.library) if args.library else builtin_library()
        dataset = ds.load_dataset(args.dataset)
    except (ModgrowError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    backend = SyntheticBackend()
    model_id = args.model or os.environ.get("LLM_MODEL_ID", "default-model")

    if args.ablation:
        try:
            grid = json.loads(Path(args.ablation).read_text(encoding="utf-8"))["cells"]
            train = ds.load_dataset(args.train_dataset) if args.train_dataset else []
            cfg = _config_from_args(args)
            report = run_ablation(
                grid, train, dataset, lib, gateway, backend, cfg, task=args.task
            )
        except (ModgrowError, OSError, KeyError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(report.render_table())
        if args.report:
            root = Path(args.report)
            root.mkdir(parents=True, exist_ok=True)
            (root / "ablation.json").write_text(
                json.dumps(report.to_doc(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
            (root / "ablation.txt").write_text(report.render_table() + "\n", encoding="utf-8")
        return 0

    report = evaluate(args.task, dataset, lib, backend, gateway, model_id=model_id)
    print(report.render_table())
    if args.report:
        _write_report(report, args.report)
        print(f"report written to {args.report}")
    return 0


def cmd_run(args) -> int:
    source = args.program
    if os.path.exists(source):
        source = Path(source).read_text(encoding="utf-8")
    try:
        lib = load_library(args.library) if args.library else builtin_library()
        scene = load_scene(Path(args.scene).read_text(encoding="utf-8"))
    except (ModgrowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    registry = ExecutionRegistry(lib)
    try:
        program = parse_program(source)
    except DslSyntaxError as exc:
        for diag in exc.diagnostics:
            print(f"line {diag.line_no}: {diag.code}: {diag.message}", file=sys.stderr)
        return 1

    bindings = {"IMAGE": V.image(ImageHandle.of_scene(scene))}
    tags = {"IMAGE": "image"}
    if args.question is not None:
        bindings["QUESTION"] = V.text(args.question)
        tags["QUESTION"] = "text"
    if args.expression is not None:
        bindings["EXPRESSION"] = V.text(args.expression)
        tags["EXPRESSION"] = "text"
    if args.instruction is not None:
        bindings["INSTRUCTION"] = V.text(args.instruction)
        tags["INSTRUCTION"] = "text"

    diagnostics = validate_program(program, registry.signatures(), tags)
    if diagnostics:
        for diag in diagnostics:
            print(f"line {diag.line_no}: {diag.code}: {diag.message}", file=sys.stderr)
        return 1
    result = execute_program(program, Environment(bindings), registry, SyntheticBackend())
    if args.trace:
        Path(args.trace).write_text(trace_to_jsonl(result.trace) + "\n", encoding="utf-8")
    if result.status != "ok":
        print(
            f"line {result.error.line_no}: RUNTIME_ERROR({result.error.kind}): {result.error.message}",
            file=sys.stderr,
        )
        return 1
    print(V.summarize(result.final))
    return 0


def cmd_library(args) -> int:
    try:
        lib = load_library(args.library)
    except ModgrowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name in lib.manifest:
        rec = lib.records[name]
        print(f"{name:24s} {rec.kind:9s} pass_rate={rec.pass_rate:.2f} v{rec.version}")
    return 0


def cmd_cache_seed(args) -> int:
    """Generate seeded datasets and record the matching completion cache."""
    try:
        lib = load_library(args.library) if args.library else builtin_library()
    except ModgrowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    knobs = {"templates": args.templates.split(",")} if args.templates else None
    train = ds.generate_dataset(args.task, seed=args.seed, n=args.n_train, knobs=knobs)
    test = ds.generate_dataset(args.task, seed=args.seed + 1, n=args.n_test, knobs=knobs)
    ds.save_dataset(train, args.train_out)
    ds.save_dataset(test, args.test_out)
    cfg = SynthesisConfig(eta=args.eta, k_candidates=args.k, r_repairs=args.repairs)
    if os.path.exists(args.cache):
        os.unlink(args.cache)
    seed_learn_and_eval(train, test, lib, SyntheticBackend(), cfg, args.cache)
    print(f"wrote {args.train_out} ({len(train)}), {args.test_out} ({len(test)}), cache {args.cache}")
    return 0


def cmd_cache_show(args) -> int:
    try:
        with open(args.cache, encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    keys = {}
    for record in records:
        keys[record["key"]] = keys.get(record["key"], 0) + 1
    print(f"{len(records)} records under {len(keys)} distinct keys")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modgrow")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--task", default="vqa")
        p.add_argument("--mode", choices=["live", "replay", "record"], default=None)
        p.add_argument("--cache", default=None)
        p.add_argument("--model", default=None)
        p.add_argument("--eta", type=float, default=0.8)
        p.add_argument("--k", type=int, default=5)
        p.add_argument("--repairs", type=int, default=3)
        p.add_argument("--wall-time-ms", type=int, default=2000)

    learn = sub.add_parser("learn", help="grow a library from a training split")
    add_common(learn)
    learn.add_argument("--dataset", required=True)
    learn.add_argument("--library", default=None)
    learn.add_argument("--out", default=None)
    learn.add_argument("--in-place", action="store_true")
    learn.set_defaults(func=cmd_learn)

    evalp = sub.add_parser("eval", help="evaluate a library on a test split")
    add_common(evalp)
    evalp.add_argument("--dataset", required=True)
    evalp.add_argument("--library", default=None)
    evalp.add_argument("--report", default=None)
    evalp.add_argument("--ablation", default=None, help="grid JSON file")
    evalp.add_argument("--train-dataset", default=None)
    evalp.set_defaults(func=cmd_eval)

    runp = sub.add_parser("run", help="run one program over a scene")
    runp.add_argument("--program", required=True, help="program file or inline text")
    runp.add_argument("--scene", required=True)
    runp.add_argument("--library", default=None)
    runp.add_argument("--question", default=None)
    runp.add_argument("--expression", default=None)
    runp.add_argument("--instruction", default=None)
    runp.add_argument("--trace", default=None)
    runp.set_defaults(func=cmd_run)

    libp = sub.add_parser("library", help="inspect a library directory")
    libp.add_argument("--library", required=True)
    libp.set_defaults(func=cmd_library)

    cachep = sub.add_parser("cache", help="manage replay caches")
    cache_sub = cachep.add_subparsers(dest="cache_command", required=True)
    seedp = cache_sub.add_parser("seed", help="generate datasets and record their cache")
    seedp.add_argument("--task", default="vqa")
    seedp.add_argument("--seed", type=int, default=7)
    seedp.add_argument("--n-train", type=int, default=48)
    seedp.add_argument("--n-test", type=int, default=20)
    seedp.add_argument("--templates", default=None, help="comma-separated template names")
    seedp.add_argument("--library", default=None)
    seedp.add_argument("--train-out", required=True)
    seedp.add_argument("--test-out", required=True)
    seedp.add_argument("--cache", required=True)
    seedp.add_argument("--eta", type=float, default=0.8)
    seedp.add_argument("--k", type=int, default=2)
    seedp.add_argument("--repairs", type=int, default=1)
    seedp.set_defaults(func=cmd_cache_seed)
    showp = cache_sub.add_parser("show", help="summarize a cache file")
    showp.add_argument("--cache", required=True)
    showp.set_defaults(func=cmd_cache_show)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
