"""Report assembly: run manifests plus CSV and Markdown metric tables."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import DataError
from .factuality import FactualityReport
from .metrics import MetricReport
from .ranking import RankingQualityReport

_COLUMNS = ["B-1", "B-4", "M", "R-L", "N-P", "N-A", "F1"]


def file_digest(path: str | Path) -> str:
    if not Path(path).exists():
        raise DataError(f"input file not found: {path}")
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    tool_version: str = __version__
    input_digests: dict[str, str] = field(default_factory=dict)
    row_counts: dict[str, int] = field(default_factory=dict)
    wall_clock_s: dict[str, float] = field(default_factory=dict)

    def add_input(self, name: str, path: str | Path) -> None:
        self.input_digests[name] = file_digest(path)

    def time_stage(self, name: str):
        manifest = self

        class _Timer:
            def __enter__(self):
                self.started = time.monotonic()
                return self

            def __exit__(self, *exc):
                manifest.wall_clock_s[name] = round(time.monotonic() - self.started, 6)
                return False

        return _Timer()

    def write(self, path: str | Path) -> None:
        payload = {
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "input_digests": self.input_digests,
            "row_counts": self.row_counts,
            "wall_clock_s": self.wall_clock_s,
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def _row_values(metrics: MetricReport | None,
                factuality: FactualityReport | None) -> list[float | None]:
    return [
        metrics.b1 if metrics else None,
        metrics.b4 if metrics else None,
        metrics.meteor if metrics else None,
        metrics.rouge_l if metrics else None,
        factuality.n_p_rate if factuality else None,
        factuality.n_a_rate if factuality else None,
        metrics.answerability_f1 if metrics else None,
    ]


def write_report_tables(
    out_dir: str | Path,
    metrics: MetricReport | None,
    factuality: FactualityReport | None,
    ranking: RankingQualityReport | None,
    metric_config: dict,
    coverage: dict | None = None,
) -> None:
    """Emit report.csv, report.md, and a metric-configuration manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    values = _row_values(metrics, factuality)

    with (out_dir / "report.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COLUMNS)
        writer.writerow([_fmt(v) for v in values])

    lines = [
        "# Evaluation report",
        "",
        "| " + " | ".join(_COLUMNS) + " |",
        "|" + "|".join(["---"] * len(_COLUMNS)) + "|",
        "| " + " | ".join(_fmt(v) for v in values) + " |",
        "",
    ]
    if ranking is not None:
        lines.append("## Ranking quality")
        lines.append("")
        for k in sorted(ranking.top_k_accuracy):
            lines.append(f"- top-{k} accuracy: {ranking.top_k_accuracy[k]:.4f}")
        if ranking.mean_reciprocal_rank is not None:
            lines.append(f"- MRR: {ranking.mean_reciprocal_rank:.4f}")
        if ranking.kendall_tau is not None:
            lines.append(f"- mean Kendall tau vs reranker order: {ranking.kendall_tau:.4f}")
        lines.append("")
    if coverage:
        lines.append("## Coverage")
        lines.append("")
        for key, value in coverage.items():
            lines.append(f"- {key}: {value}")
        lines.append("")
    (out_dir / "report.md").write_text("\n".join(lines), encoding="utf-8")

    (out_dir / "metric_config.json").write_text(
        json.dumps(metric_config, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
