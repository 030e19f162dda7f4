"""Command-line front end.

Subcommands wire the core package into reproducible file-based runs:
``eval`` writes an evaluation report, ``compare`` a per-level delta table,
``obce-weights`` a weight matrix, ``ontology-stats`` a text summary, and
``serve`` starts the HTTP service.  Data goes to files or stdout; logs go
to stderr.  Exit codes: 0 success, 2 validation error, 3 I/O error,
4 internal invariant violation.
"""

from __future__ import annotations

import functools
import logging
import os
import sys
from dataclasses import dataclass

import click

from . import __version__
from .errors import ToolkitError, ValidationError
from .loading import EvaluationContext, load_context
from .metrics import compare_reports, comparison_csv, default_levels, level_curve_csv, omap
from .obce import obce_weights_batch
from .tensorio import LabelMatrix, ScoreMatrix, WeightMatrix, read_matrix, write_matrix, write_report


@dataclass
class RunConfig:
    """Resolved options for one invocation."""

    taxonomy_path: str | None
    edge_list_path: str | None
    class_index_path: str
    levels_spec: str | None
    include_top_level: bool
    strict_empty_labels: bool
    skip_zero_positive_classes: bool
    threads: int

    @property
    def empty_labels(self) -> str:
        return "error" if self.strict_empty_labels else "max-weight"

    @property
    def zero_positive(self) -> str:
        return "skip" if self.skip_zero_positive_classes else "error"

    def resolve_threads(self) -> int:
        if self.threads == 0:
            return min(4, os.cpu_count() or 1)
        return self.threads

    def resolve_levels(self, d_max: int) -> list[int]:
        if self.levels_spec is None:
            return default_levels(d_max, self.include_top_level)
        spec = self.levels_spec
        try:
            lo_text, hi_text = spec.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise ValidationError("invalid-level-range", f"--levels expects A..B, got {spec!r}") from None
        if lo > hi:
            raise ValidationError("invalid-level-range", f"--levels bounds out of order: {spec!r}")
        return list(range(lo, hi + 1))


def _fail(exc: ToolkitError) -> None:
    click.echo(exc.one_line(), err=True)
    sys.exit(exc.exit_code)


def toolkit_command(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ToolkitError as exc:
            _fail(exc)

    return wrapper


def ontology_options(fn):
    fn = click.option("--ontology", "taxonomy_path", type=click.Path(exists=True, dir_okay=False),
                      help="Taxonomy file (JSON array of records).")(fn)
    fn = click.option("--edges", "edge_list_path", type=click.Path(exists=True, dir_okay=False),
                      help="Edge-list graph file (synthetic/test graphs).")(fn)
    fn = click.option("--class-index", "class_index_path", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="CSV mapping matrix columns to ontology nodes.")(fn)
    return fn


def policy_options(fn):
    fn = click.option("--levels", "levels_spec", default=None,
                      help="Inclusive level range A..B (default 0..d_max-1).")(fn)
    fn = click.option("--include-top-level", is_flag=True,
                      help="Add the all-zero-weight level at d_max to the default range.")(fn)
    fn = click.option("--strict-empty-labels/--no-strict-empty-labels", default=True,
                      help="Reject samples without labels (default) or give them maximum FP weight.")(fn)
    fn = click.option("--skip-zero-positive-classes/--no-skip-zero-positive-classes", default=True,
                      help="Exclude positive-free classes from means (default) or fail.")(fn)
    fn = click.option("--threads", default=0, show_default=True,
                      help="Worker threads for per-class computation; 0 = auto.")(fn)
    return fn


def _config(kwargs) -> RunConfig:
    return RunConfig(
        taxonomy_path=kwargs.pop("taxonomy_path", None),
        edge_list_path=kwargs.pop("edge_list_path", None),
        class_index_path=kwargs.pop("class_index_path"),
        levels_spec=kwargs.pop("levels_spec", None),
        include_top_level=kwargs.pop("include_top_level", False),
        strict_empty_labels=kwargs.pop("strict_empty_labels", True),
        skip_zero_positive_classes=kwargs.pop("skip_zero_positive_classes", True),
        threads=kwargs.pop("threads", 0),
    )


def _load_context(config: RunConfig) -> EvaluationContext:
    return load_context(
        class_index_path=config.class_index_path,
        taxonomy_path=config.taxonomy_path,
        edge_list_path=config.edge_list_path,
    )


def _load_pair(context, scores_path, labels_path) -> tuple[ScoreMatrix, LabelMatrix]:
    scores = read_matrix(scores_path, "scores")
    labels = read_matrix(labels_path, "labels")
    if scores.n_classes != context.n_classes:
        raise ValidationError(
            "class-count-mismatch",
            f"scores have {scores.n_classes} classes, class index has {context.n_classes}",
        )
    return scores, labels


def _report_timestamp() -> str | None:
    # Wall clock would break byte-identical reruns; only an explicit
    # SOURCE_DATE_EPOCH stamps the report.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    import datetime

    return datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc).isoformat()


def _evaluate(config: RunConfig, context: EvaluationContext, scores_path, labels_path):
    scores, labels = _load_pair(context, scores_path, labels_path)
    return omap(
        scores,
        labels,
        context.dist_base,
        levels=config.resolve_levels(context.d_max),
        classes=context.classes,
        empty_labels=config.empty_labels,
        zero_positive=config.zero_positive,
        threads=config.resolve_threads(),
        created=_report_timestamp(),
    )


def _pct(value) -> str:
    return "n/a" if value is None else f"{100.0 * value:.1f}"


@click.group()
@click.version_option(version=__version__, prog_name="omap-eval")
def main():
    """Ontology-aware evaluation for multi-label audio tagging."""
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")


@main.command("eval")
@ontology_options
@policy_options
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "-o", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--level-csv", "level_csv_path", default=None, type=click.Path(dir_okay=False),
              help="Also write the per-level mean-OAP curve as CSV.")
@toolkit_command
def cmd_eval(scores_path, labels_path, output_path, level_csv_path, **kwargs):
    """Evaluate one model: write a report, print the headline metrics."""
    config = _config(kwargs)
    context = _load_context(config)
    report = _evaluate(config, context, scores_path, labels_path)
    write_report(report, output_path)
    if level_csv_path:
        with open(level_csv_path, "w", encoding="utf-8") as fh:
            fh.write(level_curve_csv(report))
    click.echo(f"mAP   {_pct(report.map)}")
    click.echo(f"OmAP  {_pct(report.omap)}")
    click.echo(f"OmAP0 {_pct(report.omap0)}")


@main.command("compare")
@ontology_options
@policy_options
@click.option("--scores-a", "scores_a_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scores-b", "scores_b_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "-o", "output_path", required=True, type=click.Path(dir_okay=False))
@toolkit_command
def cmd_compare(scores_a_path, scores_b_path, labels_path, output_path, **kwargs):
    """Compare two models on shared labels: per-level OAP delta table."""
    config = _config(kwargs)
    context = _load_context(config)
    report_a = _evaluate(config, context, scores_a_path, labels_path)
    report_b = _evaluate(config, context, scores_b_path, labels_path)
    comparison = compare_reports(report_a, report_b)
    with open(output_path, "w", encoding="utf-8") as fh:
        fh.write(comparison_csv(comparison))
    click.echo(f"mAP   a {_pct(comparison.map_a)}  b {_pct(comparison.map_b)}  delta {_pct(comparison.map_delta)}")
    click.echo(f"OmAP  a {_pct(comparison.omap_a)}  b {_pct(comparison.omap_b)}  delta {_pct(comparison.omap_delta)}")


@main.command("obce-weights")
@ontology_options
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--beta", default=1.0, show_default=True, help="Distance power factor (>= 0).")
@click.option("--output", "-o", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["binary", "csv"]), default="binary", show_default=True)
@click.option("--strict-empty-labels/--no-strict-empty-labels", default=True)
@toolkit_command
def cmd_obce_weights(labels_path, beta, output_path, fmt, strict_empty_labels, **kwargs):
    """Export per-sample OBCE loss weights for a label matrix."""
    kwargs["strict_empty_labels"] = strict_empty_labels
    config = _config(kwargs)
    context = _load_context(config)
    labels = read_matrix(labels_path, "labels")
    if labels.n_classes != context.n_classes:
        raise ValidationError(
            "class-count-mismatch",
            f"labels have {labels.n_classes} classes, class index has {context.n_classes}",
        )
    weights = obce_weights_batch(
        labels, context.dist_base, beta, empty_labels=config.empty_labels
    )
    write_matrix(WeightMatrix.from_values(weights), output_path, fmt=fmt)
    click.echo(f"rows {weights.shape[0]}  mean {float(weights.mean())!r}", err=True)


@main.command("ontology-stats")
@ontology_options
@toolkit_command
def cmd_ontology_stats(**kwargs):
    """Summarize the graph and the evaluated-class distance matrix."""
    config = _config(kwargs)
    context = _load_context(config)
    click.echo(f"vertices {context.graph.n_vertices}")
    click.echo(f"edges {context.graph.n_edges}")
    click.echo(f"classes {context.n_classes}")
    click.echo(f"d_max {context.d_max}")
    click.echo(f"mu {context.dist_base.mu!r}")
    click.echo("connected yes")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True)
def cmd_serve(host, port):
    """Run the HTTP evaluation service."""
    import uvicorn

    uvicorn.run("omap_eval.service:app", host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
