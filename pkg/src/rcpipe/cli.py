"""Command-line surface: ingest -> build-corpus -> generate -> evaluate -> report.

Configuration comes from a JSON file (--config) with CLI flags taking
precedence.  Exit codes: 0 success, 1 usage error, 2 data error,
3 backend error.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict
from pathlib import Path

import click

from . import __version__
from .client import GenerationCache, GenerationClient, GenerationRequest, load_predictions
from .dataset import (
    load_msmarco,
    load_narrativeqa,
    read_examples,
    write_examples,
)
from .errors import BackendError, DataError
from .factuality import CachedNliBackend, HttpNliBackend
from .metrics import MetricConfig
from .mst import MixMode, MixPolicy, build_mixed_corpus, write_corpus
from .pipeline import evaluate, load_scores
from .ranking import RankedConfig, RankingMode, apply_config
from .report import RunManifest, write_report_tables
from .seqcodec import (
    SEPARATOR,
    SourceSequence,
    StyleTag,
    encode_source,
    parse_generated,
)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise click.UsageError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid config JSON: {exc.msg}") from exc


def _setting(flag_value, config: dict, key: str, default=None):
    # CLI flags win over the config file.
    if flag_value is not None:
        return flag_value
    return config.get(key, default)


@click.group()
@click.version_option(__version__)
def cli():
    """Pipeline tooling for generative reading comprehension."""


@cli.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--dataset", type=click.Choice(["msmarco", "narrativeqa"]), required=True)
@click.option("--input", "input_path", type=str, default=None)
@click.option("--summaries", type=str, default=None, help="NarrativeQA summaries CSV")
@click.option("--subset", type=click.Choice(["all", "answerable", "nlgen"]), default=None)
@click.option("--split", type=click.Choice(["train", "dev", "valid", "test"]), default=None)
@click.option("--out", "out_dir", type=str, default=None)
def ingest(config_path, dataset, input_path, summaries, subset, split, out_dir):
    """Convert a raw dataset file into the canonical example JSONL."""
    config = _load_config(config_path)
    input_path = _setting(input_path, config, "input")
    out_dir = Path(_setting(out_dir, config, "out", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    if input_path is None:
        raise click.UsageError("--input is required")
    manifest = RunManifest(command="ingest", config={
        "dataset": dataset, "input": input_path, "subset": subset, "split": split,
    })
    manifest.add_input("input", input_path)
    with manifest.time_stage("ingest"):
        if dataset == "msmarco":
            examples = load_msmarco(input_path, subset=subset or "all")
        else:
            summaries = _setting(summaries, config, "summaries")
            if summaries is None:
                raise click.UsageError("--summaries is required for narrativeqa")
            manifest.add_input("summaries", summaries)
            examples = load_narrativeqa(input_path, summaries, split_filter=split)
        n = write_examples(examples, out_dir / "examples.jsonl")
    manifest.row_counts["examples"] = n
    manifest.write(out_dir / "run_manifest.json")
    click.echo(f"wrote {n} examples to {out_dir / 'examples.jsonl'}")


@cli.command("build-corpus")
@click.option("--config", "config_path", type=str, default=None)
@click.option("--extractive", type=str, default=None, help="canonical JSONL of extractive examples")
@click.option("--conversational", type=str, default=None, help="canonical JSONL of conversational examples")
@click.option("--mix-mode", type=click.Choice(["concat", "balanced"]), default=None)
@click.option("--shuffle/--no-shuffle", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=str, default=None)
def build_corpus(config_path, extractive, conversational, mix_mode, shuffle, seed, out_dir):
    """Build a mixed-style training corpus with a manifest."""
    config = _load_config(config_path)
    extractive = _setting(extractive, config, "extractive")
    conversational = _setting(conversational, config, "conversational")
    if extractive is None or conversational is None:
        raise click.UsageError("--extractive and --conversational are required")
    policy = MixPolicy(
        mode=MixMode(_setting(mix_mode, config, "mix_mode", "concat")),
        seed=_setting(seed, config, "seed", 0),
        shuffle=bool(_setting(shuffle, config, "shuffle", False)),
    )
    out_dir = Path(_setting(out_dir, config, "out", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command="build-corpus", config={
        "extractive": extractive, "conversational": conversational,
        "mix_mode": policy.mode.value, "seed": policy.seed, "shuffle": policy.shuffle,
    })
    manifest.add_input("extractive", extractive)
    manifest.add_input("conversational", conversational)
    with manifest.time_stage("build"):
        rows = build_mixed_corpus(
            read_examples(extractive), read_examples(conversational), policy
        )
        corpus_manifest = write_corpus(rows, out_dir / "corpus.jsonl", policy)
    manifest.row_counts.update(corpus_manifest["origin_counts"])
    manifest.row_counts["rows"] = corpus_manifest["rows"]
    manifest.write(out_dir / "run_manifest.json")
    click.echo(f"wrote {corpus_manifest['rows']} rows to {out_dir / 'corpus.jsonl'}")


@cli.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--input", "input_path", type=str, required=True, help="canonical example JSONL")
@click.option("--style", type=click.Choice(["extract", "conv"]), default="conv")
@click.option("--mode", "rank_mode", type=click.Choice(["ranked_n", "no_ranking", "end_to_end"]),
              default="no_ranking")
@click.option("--top-n", type=int, default=None)
@click.option("--scores", "scores_path", type=str, default=None)
@click.option("--segmented", is_flag=True, help="print token-segmented encodings for debugging")
def encode(config_path, input_path, style, rank_mode, top_n, scores_path, segmented):
    """Encode canonical examples into model source strings (one per line)."""
    _load_config(config_path)
    config = RankedConfig(mode=RankingMode(rank_mode), top_n=top_n)
    score_map = load_scores(scores_path) if scores_path else {}
    for example in read_examples(input_path):
        passages, _ = apply_config(example, score_map.get(example.query_id), config)
        source = encode_source(SourceSequence(
            style=StyleTag(style),
            question=example.query,
            passages=tuple((i, p.text) for i, p in enumerate(passages)),
        ))
        if segmented:
            click.echo(" | ".join(seg.strip() for seg in source.split(SEPARATOR)))
        else:
            click.echo(source)


@cli.command("parse")
@click.option("--input", "input_path", type=str, required=True,
              help="JSONL of {query_id, raw} or plain text lines")
@click.option("--n-passages", type=int, default=10)
def parse_cmd(input_path, n_passages):
    """Parse raw generated text into ranking + answer records."""
    path = Path(input_path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            query_id, raw = str(record["query_id"]), record["raw"]
        except (json.JSONDecodeError, KeyError, TypeError):
            query_id, raw = str(lineno), line
        parsed = parse_generated(raw, n_passages)
        click.echo(json.dumps({
            "query_id": query_id,
            "ranking": list(parsed.ranking),
            "answer": parsed.answer,
            "is_no_answer": parsed.is_no_answer,
            "diagnostics": [d.value for d in parsed.diagnostics],
        }, ensure_ascii=False))


@cli.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--input", "input_path", type=str, required=True, help="canonical example JSONL")
@click.option("--endpoint", type=str, default=None)
@click.option("--cache", "cache_path", type=str, default=None)
@click.option("--style", type=click.Choice(["extract", "conv"]), default="conv")
@click.option("--max-new-tokens", type=int, default=128)
@click.option("--out", "out_dir", type=str, default=None)
def generate(config_path, input_path, endpoint, cache_path, style, max_new_tokens, out_dir):
    """Submit encoded sources to the generation service, cache-first."""
    config = _load_config(config_path)
    endpoint = _setting(endpoint, config, "generation_endpoint")
    cache_path = _setting(cache_path, config, "generation_cache", "generation_cache.jsonl")
    out_dir = Path(_setting(out_dir, config, "out", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    if endpoint is None:
        raise click.UsageError("--endpoint is required")
    requests_ = []
    for example in read_examples(input_path):
        source = encode_source(SourceSequence(
            style=StyleTag(style),
            question=example.query,
            passages=tuple((p.index, p.text) for p in example.passages),
        ))
        requests_.append(GenerationRequest(
            query_id=example.query_id, source=source,
            max_new_tokens=max_new_tokens, style=StyleTag(style),
            n_passages=len(example.passages),
        ))
    client = GenerationClient(endpoint)
    records = client.generate_batch(requests_, GenerationCache(cache_path))
    with (out_dir / "predictions.jsonl").open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps({"query_id": record.query_id, "raw": record.raw},
                                ensure_ascii=False) + "\n")
    click.echo(f"wrote {len(records)} predictions to {out_dir / 'predictions.jsonl'} "
               f"({client.network_calls} network calls)")


@cli.command("evaluate")
@click.option("--config", "config_path", type=str, default=None)
@click.option("--gold", type=str, default=None, help="canonical example JSONL")
@click.option("--predictions", type=str, default=None)
@click.option("--nli-cache", type=str, default=None)
@click.option("--nli-endpoint", type=str, default=None)
@click.option("--scores", "scores_path", type=str, default=None)
@click.option("--subset", type=click.Choice(["all", "answerable", "nlgen"]), default=None)
@click.option("--out", "out_dir", type=str, default=None)
@click.option("--seed", type=int, default=None)
def evaluate_cmd(config_path, gold, predictions, nli_cache, nli_endpoint,
                 scores_path, subset, out_dir, seed):
    """Compute answer metrics, factuality rates, and ranking quality."""
    config = _load_config(config_path)
    gold = _setting(gold, config, "gold")
    predictions = _setting(predictions, config, "predictions")
    nli_cache = _setting(nli_cache, config, "nli_cache")
    nli_endpoint = _setting(nli_endpoint, config, "nli_endpoint")
    scores_path = _setting(scores_path, config, "scores")
    out_dir = Path(_setting(out_dir, config, "out", "out"))
    if gold is None or predictions is None:
        raise click.UsageError("--gold and --predictions are required")
    out_dir.mkdir(parents=True, exist_ok=True)

    nli = None
    if nli_cache or nli_endpoint:
        inner = HttpNliBackend(nli_endpoint) if nli_endpoint else None
        nli = CachedNliBackend(nli_cache, inner) if nli_cache else inner

    manifest = RunManifest(command="evaluate", config={
        "gold": gold, "predictions": predictions, "nli_cache": nli_cache,
        "nli_endpoint": nli_endpoint, "scores": scores_path, "seed": seed,
    })
    manifest.add_input("gold", gold)
    manifest.add_input("predictions", predictions)
    metric_cfg = MetricConfig()
    with manifest.time_stage("evaluate"):
        examples = list(read_examples(gold))
        records = load_predictions(predictions)
        result = evaluate(
            examples, records, nli, metric_cfg,
            scores=load_scores(scores_path) if scores_path else None,
        )
    manifest.row_counts.update(result.coverage)
    manifest.write(out_dir / "run_manifest.json")
    write_report_tables(
        out_dir, result.metrics, result.factuality, result.ranking,
        metric_config=asdict(metric_cfg), coverage=result.coverage,
    )
    payload = {
        "metrics": asdict(result.metrics),
        "factuality": {
            "n_p_rate": result.factuality.n_p_rate,
            "n_a_rate": result.factuality.n_a_rate,
            "n_examples": result.factuality.n_examples,
        },
        "ranking": None if result.ranking is None else {
            "top_k_accuracy": result.ranking.top_k_accuracy,
            "mean_reciprocal_rank": result.ranking.mean_reciprocal_rank,
            "kendall_tau": result.ranking.kendall_tau,
            "n_examples": result.ranking.n_examples,
        },
        "coverage": result.coverage,
    }
    (out_dir / "evaluation.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if result.coverage["missing_predictions"]:
        click.echo(f"warning: {result.coverage['missing_predictions']} examples "
                   "had no prediction", err=True)
    click.echo(json.dumps(payload["metrics"], sort_keys=True))
    click.echo(json.dumps(payload["factuality"], sort_keys=True))


@cli.command("report")
@click.option("--evaluation", "evaluation_path", type=str, required=True,
              help="evaluation.json from a previous run")
def report_cmd(evaluation_path):
    """Render a saved evaluation as a Markdown table on stdout."""
    path = Path(evaluation_path)
    if not path.exists():
        raise DataError(f"evaluation file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    metrics = payload.get("metrics", {})
    factuality = payload.get("factuality", {})
    columns = ["B-1", "B-4", "M", "R-L", "N-P", "N-A", "F1"]
    values = [
        metrics.get("b1"), metrics.get("b4"), metrics.get("meteor"), metrics.get("rouge_l"),
        factuality.get("n_p_rate"), factuality.get("n_a_rate"),
        metrics.get("answerability_f1"),
    ]
    click.echo("| " + " | ".join(columns) + " |")
    click.echo("|" + "|".join(["---"] * len(columns)) + "|")
    click.echo("| " + " | ".join("-" if v is None else f"{v:.2f}" for v in values) + " |")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        return 3
    except ValueError as exc:
        click.echo(f"usage error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
