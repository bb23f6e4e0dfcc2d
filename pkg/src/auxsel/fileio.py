"""File formats: labeled CSV matrices, JSON documents, atomic writes.

Every writer goes through a temp-file-plus-rename so a failing command
never leaves a partial output behind. CSV cells carry 17 significant
digits, enough to round-trip doubles exactly.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import FormatError
from .scm import SampleMatrix

CSV_FORMAT = "%.17g"


def write_text_atomic(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2) + "\n")


def read_json(path):
    try:
        with open(path) as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def write_csv_matrix(path, matrix: SampleMatrix) -> None:
    rows = [",".join(matrix.labels)]
    for row in np.asarray(matrix.data, dtype=float):
        rows.append(",".join(CSV_FORMAT % x for x in row))
    write_text_atomic(path, "\n".join(rows) + "\n")


def read_csv_matrix(path) -> SampleMatrix:
    with open(path) as handle:
        header = handle.readline().strip()
        if not header:
            raise FormatError(f"{path}: empty CSV")
        labels = tuple(header.split(","))
        try:
            data = np.loadtxt(handle, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: malformed CSV ({exc})") from exc
    if data.size == 0:
        raise FormatError(f"{path}: CSV has no data rows")
    if data.shape[1] != len(labels):
        raise FormatError(
            f"{path}: header has {len(labels)} columns, data has {data.shape[1]}"
        )
    if not np.isfinite(data).all():
        raise FormatError(f"{path}: CSV contains non-finite values")
    return SampleMatrix(data=data, labels=labels)
