"""Trace export, summaries, and figure rendering.

Samples go to CSV (one row per recorded step, frozen column order), events
to a JSON-lines sidecar, run metadata to a JSON sidecar; ``--format json``
bundles all three into a single document. Exports contain no wall-clock
data, so identical runs produce byte-identical files. Figures are rendered
with matplotlib next to the delimited output.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .integrate import Event, Trace

__all__ = [
    "trace_csv_text",
    "write_trace",
    "read_trace",
    "summarize",
    "format_summary",
    "count_dips",
    "fit_decay_rates",
    "render_figures",
]


def _csv_columns(trace: Trace) -> list[str]:
    n = trace.n_components
    return ["t", "u", "teaching"] + [f"z{i}" for i in range(1, n + 1)] + ["z", trace.strength_kind]


def trace_csv_text(trace: Trace) -> str:
    """Render the samples as CSV. Floats are written with repr so every
    value round-trips exactly through parsing."""
    lines = [",".join(_csv_columns(trace))]
    totals = trace.z_total()
    strength = trace.strength()
    for i in range(len(trace)):
        row = [repr(float(trace.t[i])), repr(float(trace.u[i])), str(int(trace.teaching[i]))]
        row += [repr(float(v)) for v in trace.z[i]]
        row += [repr(float(totals[i])), repr(float(strength[i]))]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _events_jsonl(trace: Trace) -> str:
    return "".join(json.dumps(e.to_dict()) + "\n" for e in trace.events)


def _metadata_json(trace: Trace) -> str:
    return json.dumps(trace.metadata, indent=2, sort_keys=True) + "\n"


def write_trace(trace: Trace, out_dir: str | Path, stem: str, fmt: str = "csv") -> list[Path]:
    """Write a run to disk; returns the created paths.

    csv  -> <stem>.csv, <stem>.events.jsonl, <stem>.meta.json
    json -> <stem>.json (samples + events + metadata in one document)
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "csv":
        csv_path = out / f"{stem}.csv"
        csv_path.write_text(trace_csv_text(trace))
        events_path = out / f"{stem}.events.jsonl"
        events_path.write_text(_events_jsonl(trace))
        meta_path = out / f"{stem}.meta.json"
        meta_path.write_text(_metadata_json(trace))
        paths += [csv_path, events_path, meta_path]
    elif fmt == "json":
        doc = {
            "metadata": trace.metadata,
            "columns": _csv_columns(trace),
            "samples": [
                [float(trace.t[i]), float(trace.u[i]), int(trace.teaching[i])]
                + [float(v) for v in trace.z[i]]
                + [float(trace.z_total()[i]), float(trace.strength()[i])]
                for i in range(len(trace))
            ],
            "events": [e.to_dict() for e in trace.events],
        }
        json_path = out / f"{stem}.json"
        json_path.write_text(json.dumps(doc, indent=1) + "\n")
        paths.append(json_path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return paths


def read_trace(path: str | Path) -> Trace:
    """Load a trace back from a run stem, .csv, or .json path."""
    path = Path(path)
    if path.suffix == ".json" and path.exists():
        doc = json.loads(path.read_text())
        samples = np.asarray(doc["samples"], dtype=np.float64)
        n = len(doc["columns"]) - 5
        return Trace(
            t=samples[:, 0],
            u=samples[:, 1],
            teaching=samples[:, 2].astype(np.int8),
            z=samples[:, 3 : 3 + n],
            events=[_event_from_dict(e) for e in doc["events"]],
            metadata=doc["metadata"],
        )
    csv_path = path if path.suffix == ".csv" else path.with_suffix(".csv")
    if not csv_path.exists():
        raise FileNotFoundError(f"no trace at {path} (.json or .csv)")
    rows = [line.split(",") for line in csv_path.read_text().strip().splitlines()]
    header, data = rows[0], np.asarray([[float(v) for v in r] for r in rows[1:]])
    n = len(header) - 5
    stem = csv_path.with_suffix("")
    meta_path = Path(f"{stem}.meta.json")
    metadata = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    events_path = Path(f"{stem}.events.jsonl")
    events = []
    if events_path.exists():
        for line in events_path.read_text().splitlines():
            if line.strip():
                events.append(_event_from_dict(json.loads(line)))
    return Trace(
        t=data[:, 0],
        u=data[:, 1],
        teaching=data[:, 2].astype(np.int8),
        z=data[:, 3 : 3 + n],
        events=events,
        metadata=metadata,
    )


def _event_from_dict(d: dict) -> Event:
    d = dict(d)
    return Event(d.pop("t"), d.pop("kind"), d)


def count_dips(trace: Trace) -> int:
    """Number of non-teaching spans over which total knowledge falls.

    A dip is one maximal run of samples labelled teaching=0 whose total
    knowledge at the end is below its value at the start of the run; for a
    school career this counts the vacation notches (the final vacation and
    the post-graduation tail form one contiguous run).
    """
    totals = trace.z_total()
    teaching = np.asarray(trace.teaching)
    dips = 0
    i = 0
    while i < len(teaching):
        if teaching[i] == 0:
            j = i
            while j + 1 < len(teaching) and teaching[j + 1] == 0:
                j += 1
            if j > i and totals[j] < totals[i]:
                dips += 1
            i = j + 1
        else:
            i += 1
    return dips


def fit_decay_rates(t: np.ndarray, z: np.ndarray) -> list[float]:
    """Per-component exponential decay rates from a log-linear fit.

    Components that touch zero (log undefined) fit as nan.
    """
    rates = []
    for col in range(z.shape[1]):
        y = z[:, col]
        if np.any(y <= 0):
            rates.append(float("nan"))
            continue
        slope = np.polyfit(t, np.log(y), 1)[0]
        rates.append(float(-slope))
    return rates


@dataclass
class Summary:
    final_t: float
    final_z: list[float]
    final_z_total: float
    final_strength: float
    strength_kind: str
    lesson_end_z: list[float]
    n_dips: int
    clamp_events: int
    decay_fits: list[float] | None = None
    attempts: dict | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "final_t": self.final_t,
            "final_z": self.final_z,
            "final_z_total": self.final_z_total,
            "final_strength": self.final_strength,
            "strength_kind": self.strength_kind,
            "lesson_end_z": self.lesson_end_z,
            "n_dips": self.n_dips,
            "clamp_events": self.clamp_events,
        }
        if self.decay_fits is not None:
            doc["terminal_decay_fits"] = self.decay_fits
        if self.attempts is not None:
            doc["attempts"] = self.attempts
        doc.update(self.extras)
        return doc


def summarize(trace: Trace) -> Summary:
    """Headline numbers of one run: final state, per-lesson end totals,
    dip count, and decay-rate fits on the terminal break when present."""
    if len(trace) == 0:
        raise ValueError("cannot summarize an empty trace")
    totals = trace.z_total()
    strength = trace.strength()

    lesson_end_z = []
    for e in trace.events:
        if e.kind == "lesson_end":
            idx = int(np.searchsorted(trace.t, e.t))
            idx = min(idx, len(trace) - 1)
            lesson_end_z.append(float(totals[idx]))

    decay_fits = None
    teaching = np.asarray(trace.teaching)
    if len(trace) >= 5 and teaching[-1] == 0:
        start = len(teaching) - 1
        while start > 0 and teaching[start - 1] == 0:
            start -= 1
        if len(teaching) - start >= 5:
            decay_fits = fit_decay_rates(trace.t[start:], trace.z[start:])

    attempts = None
    attempt_events = [e for e in trace.events if e.kind == "attempt"]
    if attempt_events:
        solved = [e for e in attempt_events if e.data.get("outcome") == "solved"]
        attempts = {
            "n_attempts": len(attempt_events),
            "n_solved": len(solved),
            "max_theta_solved": max((e.data["theta"] for e in solved), default=0.0),
        }

    return Summary(
        final_t=float(trace.t[-1]),
        final_z=[float(v) for v in trace.z[-1]],
        final_z_total=float(totals[-1]),
        final_strength=float(strength[-1]),
        strength_kind=trace.strength_kind,
        lesson_end_z=lesson_end_z,
        n_dips=count_dips(trace),
        clamp_events=int(trace.metadata.get("clamp_events", 0)),
        decay_fits=decay_fits,
        attempts=attempts,
    )


def format_summary(summary: Summary) -> str:
    lines = [
        f"final t          : {summary.final_t:g}",
        f"final Z          : {summary.final_z_total:.6g}  (components: "
        + ", ".join(f"{v:.6g}" for v in summary.final_z) + ")",
        f"final {summary.strength_kind:<11}: {summary.final_strength:.4f}",
        f"decay dips       : {summary.n_dips}",
        f"clamp events     : {summary.clamp_events}",
    ]
    if summary.lesson_end_z:
        lines.insert(
            2,
            "lesson-end Z     : " + ", ".join(f"{v:.6g}" for v in summary.lesson_end_z),
        )
    if summary.decay_fits is not None:
        shown = ", ".join("nan" if math.isnan(r) else f"{r:.6g}" for r in summary.decay_fits)
        lines.append(f"tail decay rates : {shown}")
    if summary.attempts is not None:
        lines.append(
            f"task attempts    : {summary.attempts['n_attempts']} "
            f"({summary.attempts['n_solved']} solved, "
            f"max theta {summary.attempts['max_theta_solved']:g})"
        )
    return "\n".join(lines)


def render_figures(trace: Trace, out_dir: str | Path, stem: str) -> list[Path]:
    """Render the knowledge curves and the firmness curve as PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    unit = trace.metadata.get("unit", "time")
    totals = trace.z_total()

    fig, ax = plt.subplots(figsize=(9, 5))
    ax.step(trace.t, trace.u, where="post", color="0.4", lw=1.0, label="U (requirement)")
    for i in range(trace.n_components):
        ax.plot(trace.t, trace.z[:, i], lw=1.2, label=f"Z{i + 1}")
    ax.plot(trace.t, totals, "k", lw=1.8, label="Z (total)")
    ax.set_xlabel(f"t ({unit})")
    ax.set_ylabel("knowledge units")
    ax.legend(loc="best", fontsize=9)
    ax.set_title(f"{stem}: knowledge vs requirement")
    fig.tight_layout()
    knowledge_png = out / f"{stem}_knowledge.png"
    fig.savefig(knowledge_png, dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.plot(trace.t, trace.strength(), "C3", lw=1.4)
    ax.set_xlabel(f"t ({unit})")
    ax.set_ylabel(trace.strength_kind)
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"{stem}: knowledge firmness")
    fig.tight_layout()
    strength_png = out / f"{stem}_strength.png"
    fig.savefig(strength_png, dpi=120)
    plt.close(fig)

    return [knowledge_png, strength_png]
