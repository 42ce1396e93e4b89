"""Command-line entry point: train-lm, score, rank, eval, shuffle-test, deletion-test.

Every run that writes an artifact also writes a manifest.json beside it
recording the config hash, seed, scorer identity, toolkit version, and
whether the run succeeded, so partial outputs are always identifiable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import statistics
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .baselines import (BASELINE_NAMES, BaselineMethod, baseline_scores,
                        combine_scores, fit_tfidf)
from .corpus import Corpus, load_corpus
from .errors import InsufficientDataError, StorySalienceError
from .evaluation import mean_average_precision, spearman_rho, wilcoxon_signed_rank
from .experiments import (deletion_detection_accuracy, generate_permutations,
                          ordering_accuracy)
from .removal import RemovalMethod
from .salience import SalienceConfig, salience_corpus
from .scorer import NGramLM, RemoteScorer, load_ngram_model, perplexity, save_ngram_model

LM_METHODS = ("sd", "va", "paa")
ENDPOINT_ENV = "STORYSALIENCE_ENDPOINT"


def resolve_scorer(spec: str):
    """Build a scorer from 'ngram:model.json' or 'remote:http://host:port'.

    The STORYSALIENCE_ENDPOINT environment variable overrides the remote
    URL, so 'remote' alone suffices when it is set.
    """
    if spec.startswith("ngram:"):
        return load_ngram_model(spec[len("ngram:"):])
    if spec == "remote" or spec.startswith("remote:"):
        endpoint = os.environ.get(ENDPOINT_ENV) or spec[len("remote:"):]
        if not endpoint:
            raise ValueError(
                f"no remote endpoint: pass remote:URL or set {ENDPOINT_ENV}")
        return RemoteScorer(endpoint)
    raise ValueError(f"unknown scorer spec {spec!r}; use ngram:PATH or remote:URL")


def _config_hash(args: argparse.Namespace) -> str:
    config = {k: v for k, v in sorted(vars(args).items()) if not callable(v)}
    blob = json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _write_manifest(args: argparse.Namespace, status: str, error: str | None = None):
    if not getattr(args, "output", None):
        return
    manifest = {
        "command": args.command,
        "config_hash": _config_hash(args),
        "seed": getattr(args, "seed", None),
        "scorer": getattr(args, "scorer", None),
        "version": __version__,
        "status": status,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if error is not None:
        manifest["error"] = error
    path = Path(args.output).parent / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _emit(args: argparse.Namespace, artifact: dict, table: str = ""):
    text = json.dumps(artifact, indent=2, ensure_ascii=False) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
        if table:
            print(table)
    else:
        print(text, end="")


def _story_documents(corpus: Corpus) -> list[str]:
    return [" ".join(s.raw_text for s in story.sentences) for story in corpus.stories]


def cmd_train_lm(args: argparse.Namespace):
    corpus = load_corpus(args.corpus)
    lambdas = tuple(float(x) for x in args.lambdas.split(","))
    model = NGramLM.train(_story_documents(corpus), order=args.order,
                          min_count=args.min_count, lambdas=lambdas,
                          max_input_length=args.max_input_length)
    save_ngram_model(model, args.output)
    print(f"trained order-{args.order} model on {len(corpus.stories)} stories, "
          f"vocabulary {len(model.vocab)}")


def cmd_score(args: argparse.Namespace):
    from .salience import sequence_logprob

    corpus = load_corpus(args.corpus)
    scorer = resolve_scorer(args.scorer)
    stories = []
    for story in corpus.stories:
        lp, n = sequence_logprob([s.raw_text for s in story.sentences], scorer)
        stories.append({"story_id": story.id, "token_count": n,
                        "logprob": lp, "mean_logprob": lp / n})
    ppl = perplexity(scorer, corpus)
    artifact = {"scorer": args.scorer, "perplexity": ppl, "stories": stories}
    _emit(args, artifact, table=f"perplexity {ppl:.4f} over {len(stories)} stories")


def _method_scores(corpus: Corpus, method: str, scorer, seed: int):
    """Per-story score lists plus diagnostics for one method name."""
    if method in LM_METHODS:
        if scorer is None:
            raise ValueError(f"method {method!r} needs --scorer")
        config = SalienceConfig(method=RemovalMethod(method), scorer=scorer)
        results = salience_corpus(corpus, config)
        scores = {r.story_id: list(r.scores) for r in results}
        diags = {r.story_id: [vars(d) for d in r.diagnostics] for r in results}
        return scores, diags
    if method not in BASELINE_NAMES:
        raise ValueError(f"unknown method {method!r}")
    spec = BaselineMethod(method, seed=seed if method == "random" else None)
    model = fit_tfidf(corpus) if method == "tfidf" else None
    scores = {s.id: baseline_scores(s, spec, model) for s in corpus.stories}
    return scores, {s.id: [] for s in corpus.stories}


def _ranked_table(corpus: Corpus, method: str, scores: dict) -> str:
    lines = [f"method {method}"]
    for story in corpus.stories:
        lines.append(f"story {story.id}")
        lines.append("  rank  sentence  score")
        order = sorted(range(len(scores[story.id])),
                       key=lambda i: (-scores[story.id][i], i))
        for rank, i in enumerate(order, start=1):
            lines.append(f"  {rank:>4}  {i:>8}  {scores[story.id][i]: .6f}")
    return "\n".join(lines)


def cmd_rank(args: argparse.Namespace):
    corpus = load_corpus(args.corpus)
    scorer = resolve_scorer(args.scorer) if args.scorer else None
    method = args.method
    scores, diags = _method_scores(corpus, method, scorer, args.seed)
    if args.combine:
        extra, _ = _method_scores(corpus, args.combine, scorer, args.seed)
        scores = {sid: combine_scores(scores[sid], extra[sid]) for sid in scores}
        method = f"{args.method}+{args.combine}"
    artifact = {
        "corpus": args.corpus,
        "method": method,
        "scorer": args.scorer,
        "seed": args.seed,
        "stories": [{"story_id": s.id, "method": method,
                     "scores": scores[s.id], "diagnostics": diags[s.id]}
                    for s in corpus.stories],
    }
    _emit(args, artifact, table=_ranked_table(corpus, method, scores))


def _gold(corpus: Corpus) -> dict[str, list[bool]]:
    return {s.id: [bool(x.gold_salient) for x in s.sentences] for s in corpus.stories}


def _eval_one(corpus, gold, method, scorer, scorer_spec, seed, n_seeds):
    """One result row: MAP and per-story AP (seed-averaged for random)."""
    if method == "random" and n_seeds > 1:
        per_seed_maps = []
        accum = {sid: 0.0 for sid in gold}
        kept = None
        for i in range(n_seeds):
            scores, _ = _method_scores(corpus, method, scorer, seed + i)
            report = mean_average_precision(
                (sid, scores[sid], gold[sid]) for sid in scores)
            per_seed_maps.append(report.map)
            kept = set(report.per_story_ap)
            for sid, ap in report.per_story_ap.items():
                accum[sid] += ap
        per_story = {sid: accum[sid] / n_seeds for sid in accum if sid in kept}
        return {"method": method, "scorer": None, "seeds": n_seeds,
                "map": statistics.mean(per_seed_maps),
                "map_sd": statistics.stdev(per_seed_maps),
                "per_story_ap": per_story}
    scores, _ = _method_scores(corpus, method, scorer, seed)
    report = mean_average_precision((sid, scores[sid], gold[sid]) for sid in scores)
    row = {"method": method,
           "scorer": scorer_spec if method in LM_METHODS else None,
           "map": report.map, "per_story_ap": report.per_story_ap}
    return row


def cmd_eval(args: argparse.Namespace):
    corpus = load_corpus(args.corpus)
    gold = _gold(corpus)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    scorer_specs = args.scorer or []
    if any(m in LM_METHODS for m in methods) and not scorer_specs:
        raise ValueError("LM-based methods need at least one --scorer")
    scorers = [(spec, resolve_scorer(spec)) for spec in scorer_specs]

    results = []
    for method in methods:
        if method in LM_METHODS:
            for spec, scorer in scorers:
                results.append(_eval_one(corpus, gold, method, scorer, spec,
                                         args.seed, args.seeds))
                if args.combine:
                    row = _combined_row(corpus, gold, method, scorer, spec, args.seed)
                    results.append(row)
        else:
            results.append(_eval_one(corpus, gold, method, None, None,
                                     args.seed, args.seeds))

    wilcoxon = []
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            wilcoxon.append(_wilcoxon_row(corpus, results[i], results[j]))

    artifact = {"corpus": args.corpus, "methods": methods,
                "scorers": scorer_specs, "seed": args.seed,
                "results": results, "wilcoxon": wilcoxon}
    if len(scorers) >= 2:
        artifact["spearman"] = _spearman_block(corpus, results, scorers)
    _emit(args, artifact, table=_eval_table(results))


def _combined_row(corpus, gold, method, scorer, spec, seed):
    scores, _ = _method_scores(corpus, method, scorer, seed)
    extra, _ = _method_scores(corpus, "tfidf", None, seed)
    combined = {sid: combine_scores(scores[sid], extra[sid]) for sid in scores}
    report = mean_average_precision((sid, combined[sid], gold[sid]) for sid in combined)
    return {"method": f"{method}+tfidf", "scorer": spec,
            "map": report.map, "per_story_ap": report.per_story_ap}


def _wilcoxon_row(corpus, row_a, row_b):
    ids = [s.id for s in corpus.stories
           if s.id in row_a["per_story_ap"] and s.id in row_b["per_story_ap"]]
    entry = {"a": _row_label(row_a), "b": _row_label(row_b)}
    try:
        entry["p_value"] = wilcoxon_signed_rank(
            [row_a["per_story_ap"][i] for i in ids],
            [row_b["per_story_ap"][i] for i in ids])
    except InsufficientDataError as e:
        entry["p_value"] = None
        entry["note"] = str(e)
    return entry


def _row_label(row):
    label = row["method"]
    if row.get("scorer"):
        label += f"@{row['scorer']}"
    return label


def _spearman_block(corpus, results, scorers):
    """MAP versus perplexity across scorer settings, per LM method."""
    ppl = {spec: perplexity(scorer, corpus) for spec, scorer in scorers}
    block = []
    for method in LM_METHODS:
        rows = [r for r in results if r["method"] == method and r.get("scorer")]
        if len(rows) < 2:
            continue
        entry = {"method": method,
                 "maps": [r["map"] for r in rows],
                 "perplexities": [ppl[r["scorer"]] for r in rows]}
        try:
            entry["rho"] = spearman_rho(entry["maps"], entry["perplexities"])
        except InsufficientDataError as e:
            entry["rho"] = None
            entry["note"] = str(e)
        block.append(entry)
    return block


def _eval_table(results) -> str:
    width = max(len(_row_label(r)) for r in results)
    lines = [f"{'method'.ljust(width)}  MAP"]
    for r in results:
        sd = f" (sd {r['map_sd']:.4f}, {r['seeds']} seeds)" if "map_sd" in r else ""
        lines.append(f"{_row_label(r).ljust(width)}  {r['map']:.4f}{sd}")
    return "\n".join(lines)


def cmd_shuffle_test(args: argparse.Namespace):
    corpus = load_corpus(args.corpus)
    scorer = resolve_scorer(args.scorer)
    pairs = []
    for story in corpus.stories:
        pairs.extend(generate_permutations(story, count=args.permutations,
                                           seed=args.seed))
    accuracy = ordering_accuracy(pairs, scorer)
    artifact = {"accuracy": accuracy, "n": len(pairs)}
    _emit(args, artifact, table=f"ordering accuracy {accuracy:.4f} on {len(pairs)} pairs")


def cmd_deletion_test(args: argparse.Namespace):
    corpus = load_corpus(args.corpus)
    scorer = resolve_scorer(args.scorer)
    accuracy = deletion_detection_accuracy(corpus, scorer)
    n = sum(len(s.sentences) for s in corpus.stories)
    artifact = {"accuracy": accuracy, "n": n}
    _emit(args, artifact, table=f"deletion detection {accuracy:.4f} on {n} sentences")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storysalience",
        description="Rank story sentences by the coherence loss their removal causes")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-lm", help="train the built-in n-gram scorer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--lambdas", default="0.5,0.3,0.2")
    p.add_argument("--max-input-length", type=int, default=1024)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("score", help="perplexity and per-story log-likelihood")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scorer", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="rank sentences by salience or a baseline")
    p.add_argument("--corpus", required=True)
    p.add_argument("--method", required=True,
                   choices=LM_METHODS + BASELINE_NAMES)
    p.add_argument("--scorer")
    p.add_argument("--combine", choices=["tfidf"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="MAP per method with significance tests")
    p.add_argument("--corpus", required=True)
    p.add_argument("--methods", required=True,
                   help="comma-separated subset of sd,va,paa,random,pos-asc,pos-desc,tfidf")
    p.add_argument("--scorer", action="append",
                   help="repeatable; two or more add a MAP-vs-perplexity block")
    p.add_argument("--combine", action="store_true",
                   help="also evaluate each LM method summed with tf-idf")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1,
                   help="average the random baseline over this many seeds")
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("shuffle-test", help="original-vs-permuted ordering accuracy")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scorer", required=True)
    p.add_argument("--permutations", type=int, default=80)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_shuffle_test)

    p = sub.add_parser("deletion-test", help="share of sentences with positive salience")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scorer", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_deletion_test)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (StorySalienceError, OSError, ValueError) as e:
        _write_manifest(args, status="failed", error=str(e))
        message = str(e).replace("\n", "; ")
        print(f"error: {type(e).__name__}: {message}", file=sys.stderr)
        return 1
    _write_manifest(args, status="ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
