"""Fragment-level MOT evaluation against synthetic ground-truth labels.

A ground-truth object is *fragmented* each time its time-ordered fragments
move from one predicted trajectory to another or drop out of every
trajectory. A *switch* happens when a predicted trajectory moves from one
ground-truth object to another. With raw fragments as predictions each object
is fragmented but no trajectory ever switches object.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .costs import Fragment
from .errors import MissingLabel
from .graph import Trajectory


@dataclass
class GTBreakdown:
    label: str
    n_fragments: int
    n_pieces: int
    fragmentations: int
    switches: int
    trajectories: list[int]


@dataclass
class EvalReport:
    n_gt: int
    n_fragments: int
    n_distinct_predicted: int
    fragments_per_gt: float  # interruptions per object
    fragments_per_gt_count: float  # predicted pieces per object
    switches_per_gt: float
    per_gt: list[GTBreakdown] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "n_gt": self.n_gt,
            "n_fragments": self.n_fragments,
            "n_distinct_predicted": self.n_distinct_predicted,
            "fragments_per_gt": self.fragments_per_gt,
            "fragments_per_gt_transitions": self.fragments_per_gt,
            "fragments_per_gt_count": self.fragments_per_gt_count,
            "switches_per_gt": self.switches_per_gt,
            "per_gt": [vars(row) for row in self.per_gt],
        }


def evaluate(
    gt: Sequence[Fragment],
    predicted: Sequence[Trajectory],
    frag_index: Mapping[str, Fragment],
) -> EvalReport:
    labels = [g.gt_label if g.gt_label is not None else g.id for g in gt]

    member: dict[str, int] = {}
    for ti, traj in enumerate(predicted):
        for fid in traj.fragment_ids:
            if fid not in frag_index:
                raise KeyError(f"trajectory {ti} references unknown fragment {fid!r}")
            if frag_index[fid].gt_label is None:
                raise MissingLabel(f"fragment {fid!r} has no gt_label")
            member[fid] = ti

    by_label: dict[str, list[Fragment]] = defaultdict(list)
    for frag in frag_index.values():
        if frag.gt_label is None:
            raise MissingLabel(f"fragment {frag.id!r} has no gt_label")
        by_label[frag.gt_label].append(frag)

    # switches: a trajectory hands over from one object to another
    switches_of: dict[str, int] = defaultdict(int)
    n_switches = 0
    for traj in predicted:
        frs = sorted((frag_index[f] for f in traj.fragment_ids), key=lambda f: (f.first_t, f.id))
        for a, b in zip(frs, frs[1:]):
            if a.gt_label != b.gt_label:
                n_switches += 1
                switches_of[b.gt_label] += 1

    rows = []
    n_frag_events = 0
    n_pieces_total = 0
    for label in labels:
        frs = sorted(by_label.get(label, []), key=lambda f: (f.first_t, f.id))
        pieces = 0
        prev: Optional[int] = None
        for i, frag in enumerate(frs):
            cur = member.get(frag.id)
            if i == 0 or cur is None or cur != prev:
                pieces += 1
            prev = cur
        events = max(pieces - 1, 0)
        n_frag_events += events
        n_pieces_total += pieces
        rows.append(
            GTBreakdown(
                label=label,
                n_fragments=len(frs),
                n_pieces=pieces,
                fragmentations=events,
                switches=switches_of.get(label, 0),
                trajectories=sorted({member[f.id] for f in frs if f.id in member}),
            )
        )

    n_gt = len(labels)
    per = (lambda v: v / n_gt) if n_gt else (lambda v: 0.0)
    return EvalReport(
        n_gt=n_gt,
        n_fragments=len(frag_index),
        n_distinct_predicted=len(predicted),
        fragments_per_gt=per(n_frag_events),
        fragments_per_gt_count=per(n_pieces_total),
        switches_per_gt=per(n_switches),
        per_gt=rows,
    )


def format_table(gt_report: EvalReport, raw_report: EvalReport, result_report: EvalReport) -> str:
    """Three-column summary: ground truth, raw fragments, associated result."""

    def pct(new: float, old: float) -> str:
        if old == 0:
            return ""
        return f" ({(new - old) / old * 100:+.0f}%)"

    def cell(rep: EvalReport, attr: str, base: Optional[EvalReport] = None) -> str:
        v = getattr(rep, attr)
        return f"{v:.2f}" + (pct(v, getattr(base, attr)) if base is not None else "")

    rows = [
        ("# Distinct objects", str(gt_report.n_distinct_predicted), str(raw_report.n_distinct_predicted),
         str(result_report.n_distinct_predicted)),
    ]
    for label, attr in (
        ("Fragments per GT (count)", "fragments_per_gt_count"),
        ("Fragments per GT (transitions)", "fragments_per_gt"),
        ("Switches per GT", "switches_per_gt"),
    ):
        rows.append((label, cell(gt_report, attr), cell(raw_report, attr), cell(result_report, attr, raw_report)))
    header = ("Metrics / Statistics", "Ground truth", "Fragments", "After association")
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(4)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)
