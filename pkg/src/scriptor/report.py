"""Render analysis results as human-readable text tables.

The renderer consumes the machine-readable analysis document (the JSON
shape produced by ``AnalysisResult.to_dict``), so the text and JSON outputs
always carry identical numbers.
"""

from __future__ import annotations

from typing import Mapping


def format_mean_sd(mean: float, sd: float) -> str:
    """Render a descriptive cell as ``mean (SD)`` with 3 decimals."""
    return f"{mean:.3f} ({sd:.3f})"


def format_p(p: float) -> str:
    if 0.0 < p < 1e-4:
        return "<0.0001"
    return f"{p:.4f}"


def _render_report(lines: list[str], report: Mapping, alpha: float) -> None:
    df1, df2 = report["df"]
    marker = " *" if report["p"] < alpha else ""
    lines.append(
        f"  F({df1}, {df2}) = {report['F']:.3f}, p = {format_p(report['p'])}{marker}"
    )
    width = max((len(d["group"]) for d in report["descriptives"]), default=0)
    for d in report["descriptives"]:
        lines.append(
            f"    {d['group']:<{width}}  n={d['n']:<3d} {format_mean_sd(d['mean'], d['sd'])}"
        )
    if report["pairwise"]:
        lines.append("    post hoc (Bonferroni):")
        for c in report["pairwise"]:
            a, b = c["pair"]
            marker = " *" if c["p_bonferroni"] < alpha else ""
            lines.append(
                f"      {a} vs {b}: diff = {c['mean_diff']:.3f}, "
                f"t = {c['t']:.3f}, p = {format_p(c['p_bonferroni'])} "
                f"(raw {format_p(c['p_raw'])}){marker}"
            )
    if report.get("excluded"):
        lines.append(f"    excluded: {', '.join(report['excluded'])}")


def render_text(document: Mapping) -> str:
    """Render an analysis document to text tables, one section per task."""
    alpha = float(document.get("alpha", 0.05))
    reports = document.get("reports", [])
    lines = [f"GROUP COMPARISON REPORT (alpha = {alpha:g})", ""]
    if not reports:
        lines.append("(no reports)")
        lines.append("")
        return "\n".join(lines)

    tasks = sorted({r["task"] for r in reports})
    for task in tasks:
        lines.append(f"TASK {task}")
        lines.append("=" * (5 + len(str(task))))
        for scope, title in (("category", "Category effects"), ("feature", "Feature effects")):
            scoped = [r for r in reports if r["task"] == task and r["scope"] == scope]
            if not scoped:
                continue
            lines.append(f"{title}:")
            for r in scoped:
                lines.append(f"[{r['name']}]")
                _render_report(lines, r, alpha)
            lines.append("")
    skipped = document.get("skipped", [])
    if skipped:
        lines.append("Skipped cells:")
        for s in skipped:
            lines.append(
                f"  task {s['task']} {s['name']} ({s['scope']}): {s['reason']}"
            )
        lines.append("")
    return "\n".join(lines)
