"""Python access to the trajlab labeling core.

Every function returns the same data the CLI prints, decoded from its
canonical JSON. Errors raise a subclass of TrajlabError named after the core
error kind (TruncatedFile, EmptyInput, ...).
"""

from __future__ import annotations

import json
import os
from typing import Any, Iterable, Mapping, Sequence

from . import _core

__all__ = [
    "TrajlabError",
    "label_file",
    "label_dir",
    "filter",
    "stats_frame",
    "thresholds_default",
]


class TrajlabError(Exception):
    """Base class; `kind` holds the core error kind name."""

    kind = ""


_KINDS: dict[str, type[TrajlabError]] = {}


def _error_class(kind: str) -> type[TrajlabError]:
    if kind not in _KINDS:
        _KINDS[kind] = type(kind, (TrajlabError,), {"kind": kind})
        globals()[kind] = _KINDS[kind]
    return _KINDS[kind]


# Pre-create one class per kind so callers can catch them by name.
_code = 1
while _core.error_kind_name(_code):
    _error_class(_core.error_kind_name(_code))
    _code += 1
del _code


def _unwrap(result: tuple[int, str]) -> str:
    code, text = result
    if code != 0:
        err = json.loads(text)
        raise _error_class(err["error"])(err["message"])
    return text


def _thresholds(thresholds: Mapping[str, Any] | None) -> str | None:
    return None if thresholds is None else json.dumps(dict(thresholds))


def _labels_text(labels: Iterable[Mapping[str, Any] | str]) -> str:
    lines = [l if isinstance(l, str) else json.dumps(l, separators=(",", ":")) for l in labels]
    return "\n".join(lines) + ("\n" if lines else "")


def label_file(path: str | os.PathLike, thresholds: Mapping[str, Any] | None = None) -> dict:
    """Label one TRJL1 (.trjl) or text (.trjt) trajectory."""
    return json.loads(_unwrap(_core.label_file(os.fspath(path), _thresholds(thresholds))))


def label_dir(
    paths: str | os.PathLike | Sequence[str | os.PathLike],
    thresholds: Mapping[str, Any] | None = None,
    workers: int = 0,
) -> dict:
    """Label files and directories; returns {"labels": [...], "failures": [...]}.

    The interpreter lock is released while the core works.
    """
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    spec = json.dumps([os.fspath(p) for p in paths])
    return json.loads(_unwrap(_core.label_paths(spec, _thresholds(thresholds), workers)))


def filter(labels: Iterable[Mapping[str, Any] | str], spec: Mapping[str, Any]) -> dict:  # noqa: A001
    """Select episodes; returns the dataset manifest."""
    return json.loads(_unwrap(_core.filter(_labels_text(labels), json.dumps(dict(spec)))))


def stats_frame(
    labels: Iterable[Mapping[str, Any] | str],
    group_by: str | Sequence[str] = "",
    grouping: str = "",
    decimals: int = 2,
):
    """Mode tables as one pandas DataFrame (a list of row dicts without pandas).

    Columns: subtask, the group-by keys, N, SoR, SaeR, FR, then one column
    per mode or group.
    """
    if not isinstance(group_by, str):
        group_by = ",".join(group_by)
    tables = json.loads(_unwrap(_core.stats(_labels_text(labels), group_by, grouping, decimals)))
    rows = []
    for table in tables["tables"]:
        for row in table["rows"]:
            rows.append(
                {
                    "subtask": table["subtask"],
                    **row["key"],
                    "N": row["episodes"],
                    "SoR": row["SoR"],
                    "SaeR": row["SaeR"],
                    "FR": row["FR"],
                    **row["percent"],
                }
            )
    try:
        import pandas as pd
    except ImportError:
        return rows
    return pd.DataFrame(rows)


def thresholds_default() -> dict:
    return json.loads(_unwrap(_core.thresholds_default()))
