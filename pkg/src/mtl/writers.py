"""
Report Writers

Each writer renders one command result, a JSON-able summary plus an optional
table, in the format selected by the output file extension.
"""

import json
import os
from abc import ABC, abstractmethod

import pandas as pd


def to_json(payload) -> str:
    """Sorted, indented JSON; identical payloads give identical bytes."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, default=_jsonable)


def _jsonable(value):
    if hasattr(value, "item"):
        return value.item()
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def summary_frame(payload: dict) -> pd.DataFrame:
    """Flattens nested summary keys into a two-column key/value table."""
    flat = pd.json_normalize(payload, sep=".").iloc[0] if payload else pd.Series(dtype=object)
    return pd.DataFrame({"key": flat.index, "value": [_cell(v) for v in flat.values]})


def _cell(value):
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return value


class ReportWriter(ABC):
    """Abstract base class for report writers."""

    def __init__(self, file_path: str):
        self.file_path = file_path

    @abstractmethod
    def write(self, payload: dict, table: pd.DataFrame | None = None) -> str:
        """Writes the report and returns the output path."""
        raise NotImplementedError

    def _ensure_dir(self):
        directory = os.path.dirname(self.file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)


class JsonReportWriter(ReportWriter):
    def write(self, payload: dict, table: pd.DataFrame | None = None) -> str:
        self._ensure_dir()
        data = dict(payload)
        if table is not None:
            data["table"] = table.to_dict(orient="records")
        with open(self.file_path, "w", encoding="utf-8") as f:
            f.write(to_json(data) + "\n")
        return self.file_path


class TextReportWriter(ReportWriter):
    """Aligned plain-text table, summary lines first."""

    def write(self, payload: dict, table: pd.DataFrame | None = None) -> str:
        self._ensure_dir()
        summary = summary_frame(payload)
        with open(self.file_path, "w", encoding="utf-8") as f:
            if not summary.empty:
                f.write(summary.to_string(index=False, header=False) + "\n")
            if table is not None:
                f.write("\n" + table.to_string(index=False) + "\n")
        return self.file_path


class CsvReportWriter(ReportWriter):
    """The table when there is one, the flattened summary otherwise."""

    def write(self, payload: dict, table: pd.DataFrame | None = None) -> str:
        self._ensure_dir()
        frame = table if table is not None else summary_frame(payload)
        frame.to_csv(self.file_path, index=False, encoding="utf-8")
        return self.file_path


class XlsxReportWriter(ReportWriter):
    """A 'summary' sheet and, when given, a 'table' sheet."""

    def write(self, payload: dict, table: pd.DataFrame | None = None) -> str:
        self._ensure_dir()
        with pd.ExcelWriter(self.file_path, engine="openpyxl") as writer:
            summary_frame(payload).to_excel(writer, sheet_name="summary", index=False)
            if table is not None:
                table.to_excel(writer, sheet_name="table", index=False)
        return self.file_path


def get_writer(file_path: str) -> ReportWriter:
    """Factory function to get the correct report writer based on file extension."""
    ext = os.path.splitext(file_path)[1].lower()

    writer_map = {
        ".json": JsonReportWriter,
        ".txt": TextReportWriter,
        ".csv": CsvReportWriter,
        ".xlsx": XlsxReportWriter,
    }

    writer_class = writer_map.get(ext)
    if not writer_class:
        raise ValueError(f"Unsupported report format: {ext}")

    return writer_class(file_path)
