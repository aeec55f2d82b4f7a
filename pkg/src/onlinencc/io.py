"""On-disk formats: fragment and trajectory JSONL, per-iteration stats CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Iterator

from .costs import Fragment
from .graph import Trajectory
from .online import IterationStats, SolverStats

STATS_COLUMNS = (
    "k",
    "node_count",
    "edge_count",
    "t_add_node",
    "t_find_min_cycle",
    "t_push_flow",
    "t_clean_graph",
)


class FormatError(ValueError):
    pass


def fragment_record(frag: Fragment) -> dict:
    rec = {"id": frag.id}
    if frag.gt_label is not None:
        rec["gt_label"] = frag.gt_label
    rec["points"] = frag.points.tolist()
    return rec


def write_fragments(path, frags: Iterable[Fragment]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for frag in frags:
            fh.write(json.dumps(fragment_record(frag)) + "\n")
            n += 1
    return n


def iter_fragments(path) -> Iterator[Fragment]:
    """Stream fragments one line at a time."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                yield Fragment(rec["id"], rec["points"], rec.get("gt_label"))
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: bad fragment record: {exc}") from exc


def read_fragments(path) -> list[Fragment]:
    return list(iter_fragments(path))


def write_trajectories(path, trajs: Iterable[Trajectory]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for i, tr in enumerate(trajs):
            rec = {
                "id": f"T{i:05d}",
                "fragment_ids": list(tr.fragment_ids),
                "first_timestamp": tr.first_timestamp,
                "last_timestamp": tr.last_timestamp,
            }
            fh.write(json.dumps(rec) + "\n")
            n += 1
    return n


def read_trajectories(path) -> list[Trajectory]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(
                    Trajectory(
                        tuple(rec["fragment_ids"]),
                        float(rec["first_timestamp"]),
                        float(rec["last_timestamp"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: bad trajectory record: {exc}") from exc
    return out


def write_stats(path, stats: SolverStats) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_COLUMNS)
        for r in stats.records:
            w.writerow([getattr(r, c) for c in STATS_COLUMNS])


def read_stats(path) -> SolverStats:
    stats = SolverStats()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != STATS_COLUMNS:
            raise FormatError(f"{path}: expected header {','.join(STATS_COLUMNS)}")
        for lineno, row in enumerate(reader, 2):
            try:
                stats.records.append(
                    IterationStats(
                        int(row["k"]),
                        int(row["node_count"]),
                        int(row["edge_count"]),
                        *(float(row[c]) for c in STATS_COLUMNS[3:]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return stats


def ensure_parent(path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p
