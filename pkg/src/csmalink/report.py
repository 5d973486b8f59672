"""Delimited report output with a pinned column order."""

from __future__ import annotations

import io
import os
import tempfile
from collections.abc import Mapping

from .simulate import BerReport, ReportRow

REPORT_COLUMNS = (
    "snr_db",
    "snr_mode",
    "user_id",
    "symbols_sent",
    "symbol_errors",
    "ser",
    "data_bits_sent",
    "data_bit_errors",
    "ber",
    "user_confusions",
    "theory_ser",
    "theory_ber",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _row_fields(row: ReportRow) -> list[str]:
    return [
        _fmt(row.snr_db),
        row.snr_mode,
        _fmt(row.user_id),
        _fmt(row.symbols_sent),
        _fmt(row.symbol_errors),
        _fmt(row.ser),
        _fmt(row.data_bits_sent),
        _fmt(row.data_bit_errors),
        _fmt(row.ber),
        _fmt(row.user_confusions),
        _fmt(row.theory_ser),
        _fmt(row.theory_ber),
    ]


def report_csv(report: BerReport) -> str:
    out = io.StringIO()
    out.write(",".join(REPORT_COLUMNS) + "\n")
    for row in report.rows:
        out.write(",".join(_row_fields(row)) + "\n")
    return out.getvalue()


def multi_report_csv(reports: Mapping[str, BerReport]) -> str:
    """Several runs in one file, distinguished by a leading run column."""
    out = io.StringIO()
    out.write("run," + ",".join(REPORT_COLUMNS) + "\n")
    for name, report in reports.items():
        for row in report.rows:
            out.write(name + "," + ",".join(_row_fields(row)) + "\n")
    return out.getvalue()


def write_text_atomic(path: str, text: str) -> None:
    """Write via a sibling temp file so readers never see a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def summary_text(report: BerReport) -> str:
    """Human-oriented digest of the aggregate rows."""
    lines = ["snr_db      symbols     ser          ber          theory_ser"]
    for row in report.aggregate_rows():
        lines.append(
            f"{_fmt(row.snr_db):<10}  {row.symbols_sent:<10}  "
            f"{row.ser:<11.4e}  {row.ber:<11.4e}  {row.theory_ser:.4e}"
        )
    return "\n".join(lines) + "\n"
