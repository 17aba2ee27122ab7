"""Command-line entry point.

Subcommands: gen-problems, run-training, gen-profile, eval-profile, curves,
rl-train. Every command is seeded and reproducible: file outputs land in a
run directory with a manifest recording the configuration and artifact
checksums, clocks are simulated, and no other entropy sources exist.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

from .agents import MemorizingAgent, OracleAgent, QLearningAgent
from .core import canonical_json
from .curves import (
    export_curves,
    first_attempt_curve,
    per_skill_curves,
    render_curves_svg,
)
from .datashop import DataShopLogger, JsonlLogger, parse_log
from .errors import TutorError
from .generators import DOMAINS, generate_pool
from .graph import dump_graph, load_graph
from .llm import EndpointConfig, HttpTransport, LlmAgent, TranscriptRecorder
from .profiles import (
    build_profile,
    check_grader,
    evaluate_tutor,
    inject_incorrect,
    load_profile,
    oracle_demoer,
    save_profile,
)
from .rl import TutorEnv
from .trainer import Trainer, TrainerConfig


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: str, config: dict, files: list[str]) -> None:
    manifest = {
        "config": config,
        "files": {
            os.path.relpath(path, out_dir): _sha256(path) for path in sorted(files)
        },
    }
    _atomic_write(
        os.path.join(out_dir, "manifest.json"), canonical_json(manifest) + "\n"
    )


def _parse_params(text: str | None) -> dict:
    if not text:
        return {}
    params = json.loads(text)
    if not isinstance(params, dict):
        raise ValueError("--params must be a JSON object")
    return params


def _write_problem_files(out_dir: str, pool, jobs: int) -> list[str]:
    problems_dir = os.path.join(out_dir, "problems")
    os.makedirs(problems_dir, exist_ok=True)
    paths = []
    jobs = max(1, jobs)

    def write_one(item):
        spec, graph = item
        path = os.path.join(problems_dir, f"{spec.problem_id}.bg.json")
        _atomic_write(path, dump_graph(graph) + "\n")
        return path

    if jobs == 1:
        paths = [write_one(item) for item in pool]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool_exec:
            paths = list(pool_exec.map(write_one, pool))
    return paths


def _load_problem_graphs(run_dir: str) -> dict:
    problems_dir = os.path.join(run_dir, "problems")
    graphs = {}
    for name in sorted(os.listdir(problems_dir)):
        if name.endswith(".bg.json"):
            with open(os.path.join(problems_dir, name), encoding="utf-8") as f:
                g = load_graph(f.read())
            graphs[g.graph_id] = g
    return graphs


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_problems(args) -> int:
    pool = generate_pool(args.domain, args.n, args.seed, _parse_params(args.params))
    files = _write_problem_files(args.out, pool, args.jobs)
    _write_manifest(
        args.out,
        {
            "command": "gen-problems",
            "domain": args.domain,
            "n": args.n,
            "seed": args.seed,
            "params": _parse_params(args.params),
        },
        files,
    )
    print(f"wrote {len(files)} problems to {args.out}")
    return 0


def _make_agent(name: str, params: dict, log_dir: str):
    if name == "oracle":
        return OracleAgent()
    if name == "memorizing":
        return MemorizingAgent()
    if name == "llm":
        config = EndpointConfig(**params)
        transport = TranscriptRecorder(
            HttpTransport(config), os.path.join(log_dir, "transcript.jsonl")
        )
        return LlmAgent(transport)
    raise ValueError(f"unknown agent {name!r}; available: oracle, memorizing, llm")


def cmd_run_training(args) -> int:
    os.makedirs(args.log_dir, exist_ok=True)
    pool = generate_pool(
        args.domain, args.n_problems, args.seed, _parse_params(args.params)
    )
    agent = _make_agent(args.agent, _parse_params(args.agent_params), args.log_dir)
    tsv_path = os.path.join(args.log_dir, "transactions.tsv")
    jsonl_path = os.path.join(args.log_dir, "transactions.jsonl")
    config = TrainerConfig(
        max_incorrect_before_demo=args.max_incorrect,
        loggers=(DataShopLogger(tsv_path), JsonlLogger(jsonl_path)),
    )
    trainer = Trainer(agent, config, student_id=args.agent, session_id=f"seed{args.seed}")
    log = trainer.run_curriculum(pool)
    for logger in config.loggers:
        logger.close()
    files = [tsv_path, jsonl_path] + _write_problem_files(args.log_dir, pool, 1)
    _write_manifest(
        args.log_dir,
        {
            "command": "run-training",
            "agent": args.agent,
            "domain": args.domain,
            "n_problems": args.n_problems,
            "seed": args.seed,
            "max_incorrect": args.max_incorrect,
        },
        files,
    )
    correct = sum(1 for t in log if t.outcome.value == "CORRECT")
    print(
        f"{len(log)} transactions ({correct} correct) from {args.n_problems} "
        f"problems; logs in {args.log_dir}"
    )
    return 0


def cmd_gen_profile(args) -> int:
    params = _parse_params(args.params)
    pool = generate_pool(args.domain, args.n, args.seed, params)
    jobs = max(1, args.jobs)
    if jobs == 1:
        entries = build_profile(pool, args.n_paths, args.seed)
    else:
        # per-problem seeding makes chunking irrelevant to the sampled paths;
        # reassembling in pool order keeps the output identical to --jobs 1
        with ThreadPoolExecutor(max_workers=jobs) as pool_exec:
            parts = list(
                pool_exec.map(
                    lambda item: build_profile([item], args.n_paths, args.seed), pool
                )
            )
        entries = [e for part in parts for e in part]
    graphs = {spec.problem_id: g for spec, g in pool}
    if args.inject:
        entries = inject_incorrect(
            entries, graphs, args.inject, args.seed, per_entry=args.per_entry
        )
    os.makedirs(args.out, exist_ok=True)
    profile_path = os.path.join(args.out, "profile.jsonl")
    save_profile(entries, profile_path)
    files = [profile_path] + _write_problem_files(args.out, pool, jobs)
    _write_manifest(
        args.out,
        {
            "command": "gen-profile",
            "domain": args.domain,
            "n": args.n,
            "seed": args.seed,
            "n_paths": args.n_paths,
            "inject": args.inject,
            "per_entry": args.per_entry,
        },
        files,
    )
    n_incorrect = sum(len(e.incorrect_actions) for e in entries)
    print(
        f"profile with {len(entries)} states, "
        f"{sum(len(e.correct_actions) for e in entries)} correct and "
        f"{n_incorrect} incorrect actions in {args.out}"
    )
    return 0


def cmd_eval_profile(args) -> int:
    entries = load_profile(os.path.join(args.profile, "profile.jsonl"))
    graphs = _load_problem_graphs(args.profile)
    rng = random.Random(args.seed)
    llm_agent = None
    if args.grader == "llm" or args.demoer == "llm":
        config = EndpointConfig(**_parse_params(args.llm_params))
        transport = TranscriptRecorder(
            HttpTransport(config), os.path.join(args.profile, "eval-transcript.jsonl")
        )
        llm_agent = LlmAgent(transport)
    graders = {
        "check": lambda: check_grader(entries, graphs),
        "always-yes": lambda: (lambda state, sai: True),
        "always-no": lambda: (lambda state, sai: False),
        "random": lambda: (lambda state, sai: rng.random() < 0.5),
        "llm": lambda: llm_agent.grade,
    }
    if args.grader not in graders:
        raise ValueError(
            f"unknown grader {args.grader!r}; available: {', '.join(sorted(graders))}"
        )
    grader = graders[args.grader]()
    if args.demoer == "oracle":
        demoer = oracle_demoer(entries, graphs)
    elif args.demoer == "llm":
        demoer = llm_agent.demo
    else:
        demoer = lambda state: None  # noqa: E731
    metrics = evaluate_tutor(grader, demoer, entries, graphs)
    print(metrics.as_table())
    return 0


def cmd_curves(args) -> int:
    log = parse_log(args.log)
    policy = args.policy
    curves = {"all_skills": first_attempt_curve(log, policy=policy)}
    if args.per_skill:
        curves.update(per_skill_curves(log, policy=policy))
    export_curves(curves, args.out)
    if args.svg:
        _atomic_write(args.svg, render_curves_svg(curves) + "\n")
    print(f"wrote {len(curves)} curve(s) to {args.out}")
    return 0


def cmd_rl_train(args) -> int:
    pool = generate_pool(args.domain, args.pool, args.seed, _parse_params(args.params))
    env = TutorEnv(pool, seed=args.seed)
    agent = QLearningAgent(env.n_actions, seed=args.seed)
    history = []
    window: list[bool] = []
    crossed = None
    for episode in range(1, args.episodes + 1):
        stats = agent.run_episode(env)
        window.extend(stats["first_attempts"])
        window = window[-200:]
        if episode % args.eval_every == 0:
            rate = sum(window) / len(window) if window else 0.0
            history.append({"episode": episode, "first_attempt_correct": rate})
            print(f"episode {episode}: trailing first-attempt correctness {rate:.3f}")
            if crossed is None and rate >= 0.9:
                crossed = episode
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        metrics_path = os.path.join(args.out, "metrics.json")
        _atomic_write(
            metrics_path,
            canonical_json(
                {
                    "domain": args.domain,
                    "pool": args.pool,
                    "episodes": args.episodes,
                    "seed": args.seed,
                    "crossed_90_at": crossed,
                    "history": history,
                }
            )
            + "\n",
        )
        _write_manifest(
            args.out,
            {"command": "rl-train", "domain": args.domain, "seed": args.seed},
            [metrics_path],
        )
    if crossed is not None:
        print(f"reached 90% first-attempt correctness at episode {crossed}")
    else:
        print("did not reach 90% first-attempt correctness")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tutorenv",
        description="Generate tutor problems, train agents against them, and "
        "evaluate agents as tutors and as learners.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    domains = ", ".join(sorted(DOMAINS))

    p = sub.add_parser("gen-problems", help="generate behavior-graph problem files")
    p.add_argument("--domain", required=True, help=f"one of: {domains}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--params", help="JSON object of generator parameters")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_gen_problems)

    p = sub.add_parser("run-training", help="tutor an agent over generated problems")
    p.add_argument("--agent", required=True, help="oracle, memorizing, or llm")
    p.add_argument("--agent-params", help="JSON object (llm endpoint config)")
    p.add_argument("--domain", required=True, help=f"one of: {domains}")
    p.add_argument("--n-problems", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--log-dir", required=True)
    p.add_argument("--max-incorrect", type=int, default=None)
    p.add_argument("--params", help="JSON object of generator parameters")
    p.set_defaults(func=cmd_run_training)

    p = sub.add_parser("gen-profile", help="build a completeness profile")
    p.add_argument("--domain", required=True, help=f"one of: {domains}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-paths", type=int, default=3)
    p.add_argument("--out", required=True)
    p.add_argument("--inject", choices=["perturb_numeric", "swap_field", "off_by_one"])
    p.add_argument("--per-entry", type=int, default=2)
    p.add_argument("--params", help="JSON object of generator parameters")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_gen_profile)

    p = sub.add_parser("eval-profile", help="grade a profile with a grader/demoer")
    p.add_argument("--profile", required=True, help="gen-profile output directory")
    p.add_argument("--grader", required=True,
                   help="check, always-yes, always-no, random, or llm")
    p.add_argument("--demoer", choices=["oracle", "llm", "none"], default="none")
    p.add_argument("--llm-params", help="JSON endpoint config for the llm grader")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval_profile)

    p = sub.add_parser("curves", help="learning curves from a transaction log")
    p.add_argument("--log", required=True, help="DataShop TSV file")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--policy", choices=["a", "b"], default="a")
    p.add_argument("--per-skill", action="store_true")
    p.add_argument("--svg", help="also render the curves as SVG")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("rl-train", help="train a tabular Q agent on a problem pool")
    p.add_argument("--domain", required=True, help=f"one of: {domains}")
    p.add_argument("--pool", type=int, default=10)
    p.add_argument("--episodes", type=int, default=2000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--eval-every", type=int, default=50)
    p.add_argument("--out")
    p.add_argument("--params", help="JSON object of generator parameters")
    p.set_defaults(func=cmd_rl_train)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (TutorError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
