"""JSON and CSV formats for systems, partitions, chains and reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import AffineSystem, DynamicalSystem, LabelRegion, box_region, make_lorentz_system, make_rotation_system
from .markov import LabeledMarkovChain
from .refine import RefineReport
from .symbolic import Partition, TimedWord


def _region_from_json(item) -> LabelRegion:
    if "box" not in item or item["box"] is None:
        return LabelRegion(int(item["label"]))
    return box_region(int(item["label"]), item["box"])


def _bound(v):
    return None if not np.isfinite(v) else float(v)


def _region_to_json(region: LabelRegion, dimension: int) -> dict:
    if region.lower is None and region.upper is None:
        return {"label": region.label}
    lo, hi = region.bounds(dimension)
    box = []
    for a, b in zip(lo, hi):
        box.append(None if not (np.isfinite(a) or np.isfinite(b)) else [_bound(a), _bound(b)])
    return {"label": region.label, "box": box}


def system_from_dict(data: dict) -> DynamicalSystem:
    kind = data.get("type", "affine")
    if kind == "rotation":
        return make_rotation_system(float(data["theta"]))
    if kind != "affine":
        raise ValueError(f"unknown system type {kind!r}")
    return AffineSystem(
        np.array(data["A"], dtype=float), np.array(data["b"], dtype=float),
        tuple(_region_from_json(r) for r in data["labels"]),
        np.array(data["init_box"], dtype=float),
        euler_step=data.get("h_step"),
        alphabet_size=int(data.get("alphabet_size", 0)),
        name=data.get("name", "affine"))


def system_to_dict(system: AffineSystem) -> dict:
    return {
        "type": "affine",
        "name": system.name,
        "A": system.A_matrix.tolist(),
        "b": system.b_vector.tolist(),
        "h_step": system.euler_step,
        "labels": [_region_to_json(r, system.dimension) for r in system.label_regions],
        "init_box": system.box.tolist(),
        "alphabet_size": system.alphabet_size,
    }


def load_system(source: str) -> DynamicalSystem:
    """``"lorentz"``, ``"rotation:<theta>"`` or a path to a JSON system file."""
    if source == "lorentz":
        return make_lorentz_system()
    if source.startswith("rotation:"):
        return make_rotation_system(float(source.split(":", 1)[1]))
    return system_from_dict(json.loads(Path(source).read_text()))


def chain_to_dict(chain: LabeledMarkovChain) -> dict:
    out = {
        "alphabet_size": chain.alphabet_size,
        "mu": chain.mu.tolist(),
        "tau": chain.tau.tolist(),
        "labels": chain.labels.tolist(),
    }
    if chain.state_names is not None:
        out["states"] = [str(w) for w in chain.state_names]
    return out


def chain_from_dict(data: dict) -> LabeledMarkovChain:
    labels = [int(a) for a in data["labels"]]
    names = data.get("states")
    return LabeledMarkovChain(
        np.array(data["tau"], dtype=float), np.array(data["mu"], dtype=float), labels,
        int(data.get("alphabet_size", max(labels) + 1)),
        None if names is None else tuple(TimedWord.parse(s) for s in names))


def partition_to_dict(partition: Partition, dropped=()) -> dict:
    return {"alphabet_size": partition.alphabet_size, "words": partition.to_strings(),
            "dropped": [str(w) for w in dropped]}


def partition_from_dict(data) -> tuple[Partition, tuple[TimedWord, ...]]:
    if isinstance(data, list):
        words = [TimedWord.parse(s) for s in data]
        q = 1 + max(max(w.letters) for w in words)
        return Partition(tuple(words), q), ()
    part = Partition.from_strings(data["words"], int(data["alphabet_size"]))
    return part, tuple(TimedWord.parse(s) for s in data.get("dropped", []))


def report_to_dict(report: RefineReport) -> dict:
    return {
        "metric": report.metric,
        "n_samples_per_candidate": report.n_samples,
        "master_seed": report.master_seed,
        "initial_dropped": [str(w) for w in report.initial_dropped],
        "iterations": [
            {
                "iteration": rec.iteration,
                "candidates": [
                    {"block": str(b), "metric": v, "dropped": [str(w) for w in d]}
                    for b, v, d in zip(rec.blocks, rec.values, rec.dropped)
                ],
                "chosen": rec.chosen,
                "chosen_block": str(rec.blocks[rec.chosen]),
                "n_states": rec.n_states,
            }
            for rec in report.iterations
        ],
        "drops": report.drop_explanations(),
        "partition": report.partition.to_strings() if report.partition else None,
        "n_states": report.chain.n_states if report.chain else None,
        "chain": chain_to_dict(report.chain) if report.chain else None,
    }


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows, comment: str | None = None) -> None:
    """CSV with an optional leading ``# comment`` line and a header row."""
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]
