"""Command-line interface: verify, batch, eval, ablate, fixtures, serve."""

from __future__ import annotations

import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import click

from claimcheck.config import AppConfig, ConfigError, load_config
from claimcheck.config import build_completion_provider, build_search_provider
from claimcheck.dataset import (
    Dataset,
    DatasetError,
    SystemOutputRecord,
    join_for_eval,
    load_dataset,
    load_outputs,
    save_outputs,
)
from claimcheck.evaluation import (
    ablation_report,
    classification_report,
    confusion_matrix,
    evaluate_explanations,
)
from claimcheck.reporting import (
    ablation_to_dict,
    class_report_to_dict,
    confusion_to_dict,
    dump_json,
    explanation_report_to_dict,
    render_ablation_text,
    render_class_report_text,
    render_explanation_text,
)
from claimcheck.retrieval import (
    FixtureStore,
    RetrievalError,
    record_fixtures,
)
from claimcheck.verification import CompletionError, run_ablation, run_pipeline

logger = logging.getLogger(__name__)


def _load_cfg(ctx: click.Context, **overrides) -> AppConfig:
    try:
        return load_config(ctx.obj.get("config_path"), overrides=overrides)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


def _retryable(exc: Exception) -> bool:
    return bool(getattr(exc, "retryable", False))


def _with_retries(fn, *, attempts: int = 3, base_delay: float = 0.5, sleep=time.sleep):
    """Retry transient provider failures with bounded, jittered backoff."""
    for attempt in range(attempts):
        try:
            return fn()
        except (RetrievalError, CompletionError) as exc:
            last_attempt = attempt == attempts - 1
            if not _retryable(exc) or last_attempt:
                raise
            delay = base_delay * (2**attempt) + random.random() * base_delay
            retry_after = getattr(exc, "retry_after", None)
            if retry_after:
                delay = max(delay, retry_after)
            logger.warning("retrying after %s (attempt %d)", exc, attempt + 1)
            sleep(delay)
    raise AssertionError("unreachable")


provider_options = [
    click.option("--offline/--live", "offline", default=None,
                 help="Use recorded fixtures and the stub instead of live providers."),
    click.option("--fixtures", "fixtures_path", type=click.Path(), default=None,
                 help="Fixture file for offline search."),
    click.option("--stub", "stub_script_path", type=click.Path(), default=None,
                 help="Stub completion script for offline runs."),
]

cleaning_options = [
    click.option("--keep-hashtag-text/--drop-hashtags", "keep_hashtag_text",
                 default=None, help="Keep '#tag' text or drop the whole token."),
]


def _apply(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file.")
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, verbose: int):
    """Fact-check short claims against web evidence, with explanations."""
    level = logging.WARNING - min(verbose, 2) * 10
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


@main.command()
@click.argument("claim")
@click.option("--snippets", "snippet_count", type=click.IntRange(min=1), default=None,
              help="How many evidence snippets to attach.")
@click.option("--lang", "explanation_language", type=click.Choice(["ar", "en"]),
              default=None, help="Language of the generated explanation.")
@click.option("--json", "as_json", is_flag=True, help="Print the full result as JSON.")
@_apply(provider_options)
@_apply(cleaning_options)
@click.pass_context
def verify(ctx, claim, snippet_count, explanation_language, as_json, **overrides):
    """Verify one claim and print the verdict with its justification."""
    cfg = _load_cfg(
        ctx,
        snippet_count=snippet_count,
        explanation_language=explanation_language,
        **overrides,
    )
    try:
        run = run_pipeline(
            claim,
            search=build_search_provider(cfg),
            completion=build_completion_provider(cfg),
            k=cfg.snippet_count,
            prompt_cfg=cfg.prompt_config(),
            cleaning_cfg=cfg.cleaning_config(),
        )
    except (ConfigError, RetrievalError, CompletionError) as exc:
        raise click.ClickException(str(exc)) from exc
    if as_json:
        click.echo(
            json.dumps(
                {
                    "label": run.verdict.label.value,
                    "explanation": run.verdict.explanation,
                    "snippet_count_used": run.verdict.snippet_count_used,
                    "query": run.query,
                    "evidence": [
                        {
                            "title": h.title,
                            "url": h.url,
                            "snippet": h.snippet,
                            "rank": h.rank,
                        }
                        for h in run.hits
                    ],
                },
                ensure_ascii=False,
            )
        )
        return
    click.echo(f"label: {run.verdict.label.value}")
    click.echo(f"explanation: {run.verdict.explanation}")
    click.echo(f"evidence ({len(run.hits)} snippets):")
    for hit in run.hits:
        click.echo(f"  [{hit.rank}] {hit.title} <{hit.url}>")


def _load_gold(path: str) -> Dataset:
    fmt = "csv" if path.endswith(".csv") else "jsonl"
    try:
        return load_dataset(path, format=fmt, name=Path(path).stem)
    except (DatasetError, OSError) as exc:
        raise click.ClickException(f"cannot load gold file {path}: {exc}") from exc


@main.command()
@click.argument("gold_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="Where to write the outputs jsonl.")
@click.option("--snippets", "snippet_count", type=click.IntRange(min=1), default=None)
@_apply(provider_options)
@_apply(cleaning_options)
@click.pass_context
def batch(ctx, gold_path, out_path, snippet_count, **overrides):
    """Verify every claim in a gold file, writing one output record each.

    Claims whose providers fail permanently are reported and skipped; the
    partial output file is still written and the exit code is non-zero.
    """
    cfg = _load_cfg(ctx, snippet_count=snippet_count, **overrides)
    gold = _load_gold(gold_path)
    try:
        search = build_search_provider(cfg)
        completion = build_completion_provider(cfg)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc

    def check_one(record):
        return _with_retries(
            lambda: run_pipeline(
                record.claim_text,
                search=search,
                completion=completion,
                k=cfg.snippet_count,
                prompt_cfg=cfg.prompt_config(),
                cleaning_cfg=cfg.cleaning_config(),
            )
        )

    results: list[SystemOutputRecord | None] = [None] * len(gold)
    failures: list[tuple[str, str]] = []
    with ThreadPoolExecutor(max_workers=cfg.batch_concurrency) as pool:
        futures = {pool.submit(check_one, record): i for i, record in enumerate(gold)}
        for future, i in futures.items():
            record = gold.records[i]
            try:
                run = future.result()
            except (RetrievalError, CompletionError) as exc:
                failures.append((record.id, str(exc)))
                continue
            results[i] = SystemOutputRecord(
                id=record.id,
                predicted_label=run.verdict.label,
                generated_explanation=run.verdict.explanation,
                snippet_count=run.verdict.snippet_count_used,
                evidence_used=run.hits,
            )

    produced = [r for r in results if r is not None]
    Path(out_path).write_bytes(save_outputs(produced))
    click.echo(f"wrote {len(produced)}/{len(gold)} output records to {out_path}")
    if failures:
        for claim_id, message in failures:
            click.echo(f"failed {claim_id}: {message}", err=True)
        raise SystemExit(1)


@main.command("eval")
@click.argument("gold_path", type=click.Path(exists=True))
@click.argument("outputs_path", type=click.Path(exists=True))
@click.option("--report", "report_dir", type=click.Path(), required=True,
              help="Directory for the report files.")
@click.option("--scheme", type=click.Choice(["tf_tokens", "tf_char3grams"]),
              default=None, help="Vector representation for cosine similarity.")
@click.option("--normalize/--no-normalize", "metric_normalize", default=None,
              help="Normalize Arabic orthography inside the metrics.")
@click.pass_context
def eval_cmd(ctx, gold_path, outputs_path, report_dir, scheme, metric_normalize):
    """Score an outputs file against gold labels and explanations."""
    cfg = _load_cfg(ctx, metric_scheme=scheme, metric_normalize=metric_normalize)
    gold = _load_gold(gold_path)
    try:
        outputs = load_outputs(outputs_path)
        pairs = [
            (record.gold_label, output.predicted_label)
            for record, output in join_for_eval(gold, outputs)
        ]
    except DatasetError as exc:
        raise click.ClickException(str(exc)) from exc
    if not pairs:
        raise click.ClickException("outputs file contains no records")
    matrix = confusion_matrix([g for g, _ in pairs], [p for _, p in pairs])
    report = classification_report(matrix)
    explanations = evaluate_explanations(
        gold, outputs, scheme=cfg.metric_scheme, normalize=cfg.metric_normalize
    )

    directory = Path(report_dir)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "classification_report.json").write_text(
        dump_json(
            {
                "report": class_report_to_dict(report),
                "confusion_matrix": confusion_to_dict(matrix),
            }
        ),
        encoding="utf-8",
    )
    (directory / "explanation_metrics.json").write_text(
        dump_json(explanation_report_to_dict(explanations)), encoding="utf-8"
    )
    text = render_class_report_text(report) + "\n" + render_explanation_text(explanations)
    (directory / "report.txt").write_text(text, encoding="utf-8")
    click.echo(text.rstrip())
    click.echo(f"reports written to {directory}")


@main.command()
@click.argument("gold_path", type=click.Path(exists=True))
@click.option("--counts", default=None,
              help="Comma-separated snippet counts (default 1,3,5,7,9).")
@click.option("--report", "report_dir", type=click.Path(), default=None,
              help="Directory for report files (default: print only).")
@_apply(provider_options)
@_apply(cleaning_options)
@click.pass_context
def ablate(ctx, gold_path, counts, report_dir, **overrides):
    """Run the snippet-count ablation over a gold file and tabulate it."""
    schedule = None
    if counts:
        try:
            schedule = tuple(int(c) for c in counts.split(","))
        except ValueError:
            raise click.ClickException(f"bad --counts value: {counts!r}") from None
    cfg = _load_cfg(ctx, schedule=schedule, **overrides)
    gold = _load_gold(gold_path)
    if not len(gold):
        raise click.ClickException("gold file contains no records")
    try:
        search = build_search_provider(cfg)
        completion = build_completion_provider(cfg)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc

    gold_labels = []
    predictions: dict[int, list] = {count: [] for count in cfg.schedule}
    failures = []
    for record in gold:
        try:
            run = _with_retries(
                lambda: run_ablation(
                    record.claim_text,
                    search=search,
                    completion=completion,
                    schedule=cfg.schedule,
                    prompt_cfg=cfg.prompt_config(),
                    cleaning_cfg=cfg.cleaning_config(),
                )
            )
        except (RetrievalError, CompletionError) as exc:
            failures.append((record.id, str(exc)))
            continue
        missing = [c for c in cfg.schedule if c not in run.result.labels_by_count]
        if missing:
            failures.append(
                (record.id, f"completions failed for counts {missing}")
            )
            continue
        gold_labels.append(record.gold_label)
        for count in cfg.schedule:
            predictions[count].append(run.result.labels_by_count[count])

    if not gold_labels:
        raise click.ClickException("every claim failed; nothing to tabulate")
    reports = ablation_report(
        {count: (gold_labels, predictions[count]) for count in cfg.schedule}
    )
    text = render_ablation_text(reports)
    click.echo(text.rstrip())
    if report_dir:
        directory = Path(report_dir)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "ablation_report.json").write_text(
            dump_json(ablation_to_dict(reports)), encoding="utf-8"
        )
        (directory / "ablation_report.txt").write_text(text, encoding="utf-8")
        click.echo(f"reports written to {directory}")
    if failures:
        for claim_id, message in failures:
            click.echo(f"failed {claim_id}: {message}", err=True)
        raise SystemExit(1)


@main.group()
def fixtures():
    """Record and inspect search fixtures."""


@fixtures.command("record")
@click.argument("queries_path", type=click.Path(exists=True))
@click.option("--store", "store_path", type=click.Path(), required=True,
              help="Fixture file to write.")
@click.option("-k", "snippet_count", type=click.IntRange(min=1), default=9,
              help="How many hits to record per query.")
@click.pass_context
def fixtures_record(ctx, queries_path, store_path, snippet_count):
    """Run queries (one per line) against the live backend and record them."""
    # recording always talks to the live backend, whatever the config says
    cfg = replace(_load_cfg(ctx), offline=False, fixtures_path=None)
    try:
        provider = build_search_provider(cfg)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    queries = Path(queries_path).read_text(encoding="utf-8").splitlines()
    store = FixtureStore(store_path)
    try:
        recorded = record_fixtures(provider, store, queries, snippet_count)
    except RetrievalError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"recorded {recorded} queries into {store_path}")


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--frontend", "frontend_dir", type=click.Path(), default=None,
              help="Static frontend directory to serve at /.")
@_apply(provider_options)
@click.pass_context
def serve(ctx, host, port, frontend_dir, **overrides):
    """Run the HTTP service."""
    import uvicorn

    from claimcheck.service import create_app

    cfg = _load_cfg(ctx, host=host, port=port, frontend_dir=frontend_dir, **overrides)
    try:
        app = create_app(cfg)
    except (ConfigError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc)) from exc
    uvicorn.run(app, host=cfg.host, port=cfg.port)


if __name__ == "__main__":
    main()
