"""Locating, loading and listing case files."""
from __future__ import annotations

import fnmatch
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import SchemaError, UnknownCase
from .model import GroupCase, case_from_dict

ENV_VAR = "AEF_CATALOG_DIR"


def catalog_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files(__package__).joinpath("cases")))


def _id_key(case_id: str) -> tuple:
    """Numeric-aware ordering: 3.1.10 after 3.1.9, branch suffixes after the bare id."""
    head, _, branch = case_id.partition("-")
    nums = tuple(int(x) if x.isdigit() else x for x in head.split("."))
    return (nums, branch)


def _index(directory: Path) -> dict[str, Path]:
    out: dict[str, Path] = {}
    if not directory.is_dir():
        raise UnknownCase(f"catalog directory {directory} does not exist")
    for path in sorted(directory.glob("*.json")):
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}", file=str(path)) from exc
        cid = data.get("id") if isinstance(data, dict) else None
        if not isinstance(cid, str):
            raise SchemaError(f"{path}: missing case id", file=str(path))
        if cid in out:
            raise SchemaError(f"duplicate case id {cid} in {out[cid].name} and {path.name}")
        out[cid] = path
    return out


def load_file(path: str | Path) -> GroupCase:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}", file=str(path)) from exc
    return case_from_dict(data, source=str(path))


def load_case(case_id: str, directory: str | Path | None = None) -> GroupCase:
    index = _index(Path(directory) if directory else catalog_dir())
    if case_id not in index:
        raise UnknownCase(f"unknown case {case_id!r}", case=case_id)
    return load_file(index[case_id])


@dataclass(frozen=True)
class CaseSummary:
    id: str
    bianchi_label: str
    transitivity: str
    expected_outcome: str
    flags: tuple[str, ...]
    path: str

    def to_json(self) -> dict:
        return {"id": self.id, "bianchi_label": self.bianchi_label, "transitivity": self.transitivity,
                "expected_outcome": self.expected_outcome, "flags": list(self.flags)}


def case_ids(pattern: str | None = None, directory: str | Path | None = None) -> list[str]:
    index = _index(Path(directory) if directory else catalog_dir())
    ids = sorted(index, key=_id_key)
    if pattern:
        ids = [i for i in ids if fnmatch.fnmatchcase(i, pattern)]
    return ids


def list_cases(pattern: str | None = None, directory: str | Path | None = None) -> list[CaseSummary]:
    directory = Path(directory) if directory else catalog_dir()
    index = _index(directory)
    out = []
    for cid in case_ids(pattern, directory):
        data = json.loads(index[cid].read_text())
        flags = tuple(sorted({f["field"] for f in data.get("flags", [])}))
        out.append(CaseSummary(cid, data.get("bianchi_label", ""), data.get("transitivity", ""),
                               data.get("expected_outcome", ""), flags, str(index[cid])))
    return out
