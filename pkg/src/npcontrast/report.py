"""Machine-readable report documents.

Reports serialize deterministically (sorted keys, fixed layout, shortest
round-trip float repr) so identical inputs produce byte-identical files, and
so numbers printed by different surfaces (CLI, HTTP service) can be compared
digit for digit.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .domain import ClassifierLUT, ContrastReport, ValueDomain

SCHEMA_VERSION = "1"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def format_level(value: float) -> str:
    """Levels as JSON keys: integral levels print as integers."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def significant(value: float, digits: int = 12) -> str:
    return f"{value:.{digits}g}"


def results_dict(
    report: ContrastReport,
    domain: ValueDomain,
    class_ids: list[int] | None = None,
) -> dict:
    """Report results keyed by the caller's class ids (defaults to 1..n)."""
    ids = class_ids if class_ids is not None else list(range(1, report.n_classes + 1))
    if len(ids) != report.n_classes:
        raise ValueError("class_ids must match the report's class count")
    out = {
        "npc": report.npc,
        "pc": report.pc,
        "n_classes": report.n_classes,
        "nominal_range": [domain.nominal_min, domain.nominal_max],
        "compute_path": report.compute_path,
        "per_class_error": {
            str(ids[i - 1]): err for i, err in sorted(report.per_class_error.items())
        },
        "pairwise": report.pairwise.tolist() if report.pairwise is not None else None,
    }
    if report.pairwise is not None:
        out["pairwise_class_ids"] = [int(i) for i in ids]
    return out


def lut_dict(lut: ClassifierLUT, class_ids: list[int] | None = None) -> dict:
    ids = class_ids if class_ids is not None else list(range(1, lut.n_classes + 1))
    return {
        "assignment": {
            format_level(v): int(ids[c - 1]) for v, c in zip(lut.levels, lut.classes)
        },
        "unseen_policy": lut.unseen_policy,
        "n_classes": lut.n_classes,
    }


def input_entry(path: str | Path) -> dict:
    return {"path": str(path), "sha256": sha256_file(path)}


def make_document(command: str, inputs: dict, settings: dict, results: dict, **extra) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "settings": settings,
        "results": results,
    }
    doc.update(extra)
    return doc


def write_document(doc: dict, path: str | Path) -> None:
    Path(path).write_text(canonical_json(doc), encoding="utf-8")
