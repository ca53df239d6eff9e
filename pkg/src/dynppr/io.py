"""File formats: event streams, id dictionaries, embeddings, reports,
and flat key=value config files.

Event stream (UTF-8 text): one event per line,
``timestamp<TAB>src<TAB>dst<TAB>op`` with op I or D; an optional fifth
column carries the insert weight.  Lines starting with # are skipped.
Timestamps must be non-decreasing.  Node ids are decimal integers unless
an id dictionary is in play, in which case arbitrary strings are mapped
to dense integer ids in order of first appearance.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .graph import DELETE, INSERT, EdgeEvent


class MalformedLineError(ValueError):
    """Carries the 1-based line number and the reason, so the CLI can emit
    a machine-readable error record."""

    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


@dataclass
class IdMap:
    """String-to-dense-int mapping, assigned in order of first appearance."""

    ids: dict[str, int] = field(default_factory=dict)

    def get(self, name: str) -> int:
        if name not in self.ids:
            self.ids[name] = len(self.ids)
        return self.ids[name]

    def names(self) -> list[str]:
        out = [""] * len(self.ids)
        for name, i in self.ids.items():
            out[i] = name
        return out

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name, i in sorted(self.ids.items(), key=lambda kv: kv[1]):
                fh.write(f"{name}\t{i}\n")

    @classmethod
    def load(cls, path: str) -> "IdMap":
        ids: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise MalformedLineError(lineno, "id map lines are name<TAB>id")
                try:
                    ids[parts[0]] = int(parts[1])
                except ValueError:
                    raise MalformedLineError(lineno, f"bad id {parts[1]!r}") from None
        return cls(ids)


def parse_event_line(line: str, lineno: int, id_map: Optional[IdMap] = None) -> EdgeEvent:
    parts = line.rstrip("\n").split("\t")
    if len(parts) not in (4, 5):
        raise MalformedLineError(
            lineno, f"expected 4 or 5 tab-separated fields, got {len(parts)}"
        )
    ts_str, src, dst, op = parts[:4]
    try:
        timestamp = int(ts_str)
    except ValueError:
        raise MalformedLineError(lineno, f"bad timestamp {ts_str!r}") from None
    if op not in (INSERT, DELETE):
        raise MalformedLineError(lineno, f"bad op {op!r}, expected I or D")
    weight = 1.0
    if len(parts) == 5:
        try:
            weight = float(parts[4])
        except ValueError:
            raise MalformedLineError(lineno, f"bad weight {parts[4]!r}") from None
    if id_map is not None:
        u, v = id_map.get(src), id_map.get(dst)
    else:
        try:
            u, v = int(src), int(dst)
        except ValueError:
            raise MalformedLineError(
                lineno, f"node ids must be integers without an id dictionary"
            ) from None
    if u < 0 or v < 0:
        raise MalformedLineError(lineno, "negative node id")
    return EdgeEvent(u, v, op, timestamp, weight)


def read_event_stream(path: str, id_map: Optional[IdMap] = None) -> list[EdgeEvent]:
    events: list[EdgeEvent] = []
    last_ts = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            ev = parse_event_line(line, lineno, id_map)
            if last_ts is not None and ev.timestamp < last_ts:
                raise MalformedLineError(lineno, "timestamps must be non-decreasing")
            last_ts = ev.timestamp
            events.append(ev)
    return events


def write_event_stream(path: str, events: Iterable[EdgeEvent],
                       names: Optional[Sequence[str]] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            src = names[ev.u] if names is not None else ev.u
            dst = names[ev.v] if names is not None else ev.v
            line = f"{ev.timestamp}\t{src}\t{dst}\t{ev.op}"
            if ev.op == INSERT and ev.weight != 1.0:
                line += f"\t{ev.weight!r}"
            fh.write(line + "\n")


def format_float(x: float, precision: int = 9) -> str:
    return f"{x:.{precision}g}"


def write_embeddings(path: str, rows: Iterable[tuple[int, int, Sequence[float]]],
                     dim: int, precision: int = 9) -> None:
    """TSV with header t, node, v0..v{dim-1}.  Written atomically: the
    target file appears only once the whole run succeeded."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        header = "t\tnode\t" + "\t".join(f"v{i}" for i in range(dim))
        fh.write(header + "\n")
        for t, node, vec in rows:
            vals = "\t".join(format_float(x, precision) for x in vec)
            fh.write(f"{t}\t{node}\t{vals}\n")
    os.replace(tmp, path)


def read_embeddings(path: str) -> list[tuple[int, int, list[float]]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("t\tnode"):
            raise MalformedLineError(1, "missing embeddings header")
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            out.append((int(parts[0]), int(parts[1]), [float(x) for x in parts[2:]]))
    return out


def write_report(path: str, reports, names: Optional[Sequence[str]] = None) -> None:
    """Change reports as TSV: t, node, degree, degree_change, movement, z."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("t\tnode\tdegree\tdegree_change\tmovement\tz_score\n")
        for report in reports:
            for row in report.rows:
                node = names[row.node] if names is not None else row.node
                fh.write(
                    f"{report.snapshot}\t{node}\t{format_float(row.degree)}\t"
                    f"{format_float(row.degree_change)}\t{format_float(row.movement)}\t"
                    f"{format_float(row.z_score)}\n"
                )
    os.replace(tmp, path)


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; # comments and blank lines skipped."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise MalformedLineError(lineno, "config lines are key=value")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
