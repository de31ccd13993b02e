"""Report assembly and rendering shared by the CLI commands.

A report is a plain dict (the JSON document); the table renderer consumes the
same dict so both output formats always carry identical data.
"""

from __future__ import annotations

import json
from typing import Any

SCHEMA = "patchwork/1"


def new_report(command: str, instance_meta: dict[str, Any], warnings: list[str]) -> dict[str, Any]:
    return {
        "schema": SCHEMA,
        "command": command,
        "instance": instance_meta,
        "warnings": list(warnings),
        "tables": {},
        "verdicts": {},
        "errors": [],
    }


def report_failed(report: dict[str, Any]) -> bool:
    if report["errors"]:
        return True
    return any(v is False for v in report["verdicts"].values())


def render_json(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2)


def _render_matrix(name: str, data: list, lines: list[str]) -> None:
    lines.append(f"  {name} (rows q, cols p):")
    width = max((len(str(v)) for row in data for v in row), default=1)
    for q, row in enumerate(data):
        cells = " ".join(str(v).rjust(width) for v in row)
        lines.append(f"    q={q}: {cells}")


def render_table(report: dict[str, Any]) -> str:
    lines = [f"patchwork {report['command']}"]
    meta = report["instance"]
    meta_bits = [f"{k}={v}" for k, v in meta.items() if k != "digest"]
    lines.append("instance: " + " ".join(meta_bits))
    if "digest" in meta:
        lines.append(f"digest: {meta['digest']}")
    for warning in report["warnings"]:
        lines.append(f"warning: {warning}")
    for name, table in report["tables"].items():
        if isinstance(table, list) and table and isinstance(table[0], list):
            _render_matrix(name, table, lines)
        elif isinstance(table, dict):
            lines.append(f"  {name}:")
            for key, value in table.items():
                if isinstance(value, list) and value and isinstance(value[0], list):
                    _render_matrix(str(key), value, lines)
                else:
                    lines.append(f"    {key}: {value}")
        else:
            lines.append(f"  {name}: {table}")
    for name, verdict in report["verdicts"].items():
        lines.append(f"verdict {name}: {verdict}")
    for error in report["errors"]:
        lines.append(f"error: {error}")
    return "\n".join(lines) + "\n"
