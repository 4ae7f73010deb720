"""Serialization of evaluation results to JSON and plain text.

JSON reports keep full-precision values; the text renderings round
half-up to two decimals, mirroring the ablation table layout (per-class
precision/recall/F1 for False and True, then accuracy and weighted F1).
"""

from __future__ import annotations

import json
from typing import Mapping

from claimcheck.dataset import Label
from claimcheck.evaluation import (
    ClassReport,
    ConfusionMatrix3,
    ExplanationEvalReport,
    round_half_up,
)


def class_report_to_dict(report: ClassReport) -> dict:
    payload: dict = {"per_class": {}}
    for label, metrics in report.per_class.items():
        payload["per_class"][label.value] = {
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f1": metrics.f1,
            "support": metrics.support,
        }
    payload["accuracy"] = report.accuracy
    payload["weighted_f1"] = report.weighted_f1
    return payload


def confusion_to_dict(matrix: ConfusionMatrix3) -> dict:
    return {
        "class_order": ["False", "True", "Other"],
        "rows_gold_cols_predicted": [list(row) for row in matrix.counts],
    }


def ablation_to_dict(reports: Mapping[int, ClassReport]) -> dict:
    rows = []
    for count in sorted(reports):
        row = {"snippet_count": count}
        row.update(class_report_to_dict(reports[count]))
        rows.append(row)
    return {"rows": rows}


def _metric_cells(report: ClassReport) -> list[str]:
    cells = []
    for label in (Label.FALSE, Label.TRUE):
        metrics = report.per_class[label]
        cells += [
            f"{round_half_up(metrics.precision):.2f}",
            f"{round_half_up(metrics.recall):.2f}",
            f"{round_half_up(metrics.f1):.2f}",
        ]
    cells += [
        f"{round_half_up(report.accuracy):.2f}",
        f"{round_half_up(report.weighted_f1):.2f}",
    ]
    return cells


_HEADER = (
    "model",
    "False-P",
    "False-R",
    "False-F1",
    "True-P",
    "True-R",
    "True-F1",
    "Accuracy",
    "F1-weighted",
)


def render_ablation_text(reports: Mapping[int, ClassReport]) -> str:
    """Fixed-width table, one row per snippet count."""
    rows = [list(_HEADER)]
    for count in sorted(reports):
        rows.append([f"top-{count}"] + _metric_cells(reports[count]))
    widths = [max(len(row[i]) for row in rows) for i in range(len(_HEADER))]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def render_class_report_text(report: ClassReport, title: str = "classification") -> str:
    rows = [list(_HEADER)]
    rows.append([title] + _metric_cells(report))
    widths = [max(len(row[i]) for row in rows) for i in range(len(_HEADER))]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def explanation_report_to_dict(report: ExplanationEvalReport) -> dict:
    return {
        "rows": [
            {
                "id": row.id,
                "rouge_vs_ex": {
                    "precision": row.rouge_vs_ex.precision,
                    "recall": row.rouge_vs_ex.recall,
                    "f1": row.rouge_vs_ex.f1,
                },
                "rouge_vs_xex": {
                    "precision": row.rouge_vs_xex.precision,
                    "recall": row.rouge_vs_xex.recall,
                    "f1": row.rouge_vs_xex.f1,
                },
                "cos_vs_ex": row.cos_vs_ex,
                "cos_vs_xex": row.cos_vs_xex,
            }
            for row in report.rows
        ],
        "averages": {
            "rouge_l_f1_vs_ex": report.avg_rouge_vs_ex,
            "rouge_l_f1_vs_xex": report.avg_rouge_vs_xex,
            "cosine_vs_ex": report.avg_cos_vs_ex,
            "cosine_vs_xex": report.avg_cos_vs_xex,
        },
    }


def render_explanation_text(report: ExplanationEvalReport) -> str:
    lines = [
        "explanation metrics (averages)",
        f"  ROUGE-L-F1 vs short gold:     {round_half_up(report.avg_rouge_vs_ex):.2f}",
        f"  ROUGE-L-F1 vs extended gold:  {round_half_up(report.avg_rouge_vs_xex):.2f}",
        f"  cosine vs short gold:         {round_half_up(report.avg_cos_vs_ex):.2f}",
        f"  cosine vs extended gold:      {round_half_up(report.avg_cos_vs_xex):.2f}",
    ]
    return "\n".join(lines) + "\n"


def dump_json(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
