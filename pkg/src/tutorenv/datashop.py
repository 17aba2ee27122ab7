"""Tab-separated transaction logging compatible with DataShop tutor exports,
plus a JSONL mirror using the same field names.

Files open with a version comment line, then the header row. Cell escaping
is bit-exact and documented in docs/datashop-format.md: backslash, tab,
newline, and carriage return escape to \\\\, \\t, \\n, \\r. Sinks are
append-only and serialize concurrent writers with a lock.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import io
import json
import threading

from .core import Outcome, Sai, Transaction, TransactionLog
from .errors import HeaderMismatch, RowArity, SinkError

VERSION_LINE = "#tutorenv-datashop-tsv v1"

COLUMNS = (
    "Anon Student Id",
    "Session Id",
    "Time",
    "Level (Domain)",
    "Problem Name",
    "Step Name",
    "Attempt At Step",
    "Outcome",
    "Selection",
    "Action",
    "Input",
    "KC (Default)",
    "KC Opportunity",
)

_TIME_FORMAT = "%Y-%m-%d %H:%M:%S.%f"


def escape_cell(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_cell(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


_EPOCH = _dt.datetime(1970, 1, 1, tzinfo=_dt.timezone.utc)


def _format_time(ms: int) -> str:
    # integer arithmetic throughout: float epochs lose sub-ms precision
    stamp = _EPOCH + _dt.timedelta(milliseconds=ms)
    return stamp.strftime(_TIME_FORMAT)[:-3]  # keep milliseconds only


def _parse_time(text: str) -> int:
    stamp = _dt.datetime.strptime(text, _TIME_FORMAT).replace(
        tzinfo=_dt.timezone.utc
    )
    return (stamp - _EPOCH) // _dt.timedelta(milliseconds=1)


def transaction_to_row(t: Transaction) -> list[str]:
    return [
        t.student_id,
        t.session_id,
        _format_time(t.timestamp),
        t.domain,
        t.problem_name,
        t.step_name,
        str(t.attempt_at_step),
        t.outcome.value,
        t.sai.selection,
        t.sai.action_type,
        t.sai.input,
        t.skill,
        str(t.opportunity),
    ]


def row_to_transaction(cells: list[str], extra_columns=()) -> Transaction:
    extras = tuple(zip(extra_columns, cells[len(COLUMNS):]))
    return Transaction(
        student_id=cells[0],
        session_id=cells[1],
        problem_name=cells[4],
        step_name=cells[5],
        attempt_at_step=int(cells[6]),
        outcome=Outcome(cells[7]),
        sai=Sai(cells[8], cells[9], cells[10]),
        skill=cells[11],
        opportunity=int(cells[12]),
        timestamp=_parse_time(cells[2]),
        domain=cells[3],
        extras=extras,
    )


class DataShopLogger:
    """Append-only TSV sink; one row per logged transaction.

    Accepts a path or an open text handle. The version line and header are
    written once, before the first row.
    """

    def __init__(self, sink):
        self._lock = threading.Lock()
        self._owns = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
        try:
            self._handle = open(sink, "a", encoding="utf-8") if self._owns else sink
        except OSError as exc:
            raise SinkError(str(exc)) from exc
        self._header_written = self._tell_nonzero()

    def _tell_nonzero(self) -> bool:
        try:
            return self._handle.tell() > 0
        except (OSError, io.UnsupportedOperation):
            return False

    def log(self, t: Transaction) -> None:
        with self._lock:
            try:
                if not self._header_written:
                    self._handle.write(VERSION_LINE + "\n")
                    self._handle.write("\t".join(COLUMNS) + "\n")
                    self._header_written = True
                row = "\t".join(escape_cell(c) for c in transaction_to_row(t))
                self._handle.write(row + "\n")
                self._handle.flush()
            except OSError as exc:
                raise SinkError(str(exc)) from exc

    def close(self) -> None:
        if self._owns:
            self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class JsonlLogger:
    """JSONL mirror of the TSV format with identical field names per line."""

    def __init__(self, sink):
        self._lock = threading.Lock()
        self._owns = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
        try:
            self._handle = open(sink, "a", encoding="utf-8") if self._owns else sink
        except OSError as exc:
            raise SinkError(str(exc)) from exc

    def log(self, t: Transaction) -> None:
        doc = dict(zip(COLUMNS, transaction_to_row(t)))
        doc.update(dict(t.extras))
        with self._lock:
            try:
                self._handle.write(json.dumps(doc, sort_keys=True) + "\n")
                self._handle.flush()
            except OSError as exc:
                raise SinkError(str(exc)) from exc

    def close(self) -> None:
        if self._owns:
            self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_log(log, sink) -> None:
    with DataShopLogger(sink) as logger:
        for t in log:
            logger.log(t)


def parse_log(source) -> TransactionLog:
    """Read a TSV log back; extra columns beyond the core set are preserved
    opaquely on each transaction.

    Raises HeaderMismatch when the core columns are missing or reordered and
    RowArity (with line number) when a row has the wrong width.
    """
    # Split on plain newlines only: escaped cells may legitimately carry
    # unicode line separators that splitlines() would treat as row breaks.
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8", newline="") as f:
            lines = f.read().split("\n")
    else:
        lines = source.read().split("\n")
    numbered = [
        (i, line)
        for i, line in enumerate(lines, start=1)
        if line and not (line.startswith("#"))
    ]
    if not numbered:
        return TransactionLog()
    _, header_line = numbered[0]
    header = header_line.split("\t")
    if tuple(header[: len(COLUMNS)]) != COLUMNS:
        raise HeaderMismatch(
            f"expected columns starting with {COLUMNS[:3]}..., got {header[:3]}"
        )
    extra_columns = tuple(header[len(COLUMNS):])
    log = TransactionLog(extra_columns=extra_columns)
    for lineno, line in numbered[1:]:
        cells = [unescape_cell(c) for c in line.split("\t")]
        if len(cells) != len(header):
            raise RowArity(
                f"expected {len(header)} columns, got {len(cells)}",
                line_number=lineno,
            )
        log.append(row_to_transaction(cells, extra_columns))
    return log


def parse_jsonl_log(source) -> TransactionLog:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8", newline="") as f:
            lines = f.read().split("\n")
    else:
        lines = source.read().split("\n")
    log = TransactionLog()
    for line in lines:
        if not line.strip():
            continue
        doc = json.loads(line)
        cells = [doc[c] for c in COLUMNS]
        extras = tuple(sorted((k, v) for k, v in doc.items() if k not in COLUMNS))
        t = row_to_transaction(cells)
        if extras:
            t = dataclasses.replace(t, extras=extras)
        log.append(t)
    return log
