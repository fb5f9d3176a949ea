"""Problem-instance files, flat config files, CSV output, and the run log.

Instance file: UTF-8 text with `#` comments. Sections `space` (probabilities),
`losses` (row-major matrix), `binary` (flag), and optional `prior` /
`posterior` weight lists. Section data may follow the header inline or on
subsequent lines.

Config file: `section.key = value` lines; command-line flags win on conflict.
Run log: append-only JSON lines, one record per invocation.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DataDistribution, LossTable
from .measures import ProbMeasure

_SECTIONS = ("space", "losses", "binary", "prior", "posterior")


@dataclass(frozen=True)
class Instance:
    dist: DataDistribution
    table: LossTable
    prior: ProbMeasure | None = None
    posterior: ProbMeasure | None = None

    def prior_or_uniform(self) -> ProbMeasure:
        return self.prior if self.prior is not None else ProbMeasure.uniform(self.table.hypothesis_count)


def _strip(line: str) -> str:
    hash_pos = line.find("#")
    if hash_pos >= 0:
        line = line[:hash_pos]
    return line.strip()


def parse_instance(text: str) -> Instance:
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = _strip(raw)
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if sep and head.strip().lower() in _SECTIONS:
            current = head.strip().lower()
            sections.setdefault(current, [])
            if rest.strip():
                sections[current].append(rest.strip())
        elif current is not None:
            sections[current].append(line)
        else:
            raise ValueError(f"data before any section header: {line!r}")
    if "space" not in sections or "losses" not in sections:
        raise ValueError("instance file needs `space` and `losses` sections")

    probs = np.array([float(x) for row in sections["space"] for x in row.split()])
    dist = DataDistribution(probs)
    rows = [[float(x) for x in row.split()] for row in sections["losses"]]
    if len({len(r) for r in rows}) != 1:
        raise ValueError("loss rows must all have the same length")
    table = LossTable(np.array(rows))
    if table.point_count != dist.point_count:
        raise ValueError("loss matrix width must match the data space size")
    if "binary" in sections:
        flag_text = " ".join(sections["binary"]).lower()
        if flag_text not in ("true", "false"):
            raise ValueError(f"binary flag must be true or false, got {flag_text!r}")
        if (flag_text == "true") != table.binary_flag:
            raise ValueError("declared binary flag contradicts the loss entries")

    def measure(name):
        if name not in sections:
            return None
        w = np.array([float(x) for row in sections[name] for x in row.split()])
        if w.size != table.hypothesis_count:
            raise ValueError(f"{name} length must match the hypothesis count")
        return ProbMeasure(w)

    return Instance(dist=dist, table=table, prior=measure("prior"), posterior=measure("posterior"))


def load_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def format_instance(inst: Instance) -> str:
    def vec(v):
        return " ".join(fmt(x) for x in v)

    lines = ["# pacbayes problem instance", "space: " + vec(inst.dist.probs), "losses:"]
    lines += [vec(row) for row in inst.table.loss]
    lines.append(f"binary: {'true' if inst.table.binary_flag else 'false'}")
    if inst.prior is not None:
        lines.append("prior: " + vec(inst.prior.weights))
    if inst.posterior is not None:
        lines.append("posterior: " + vec(inst.posterior.weights))
    return "\n".join(lines) + "\n"


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(format_instance(inst), encoding="utf-8")


def parse_config(text: str) -> dict[str, str]:
    """Flat `section.key = value` lines into a dict keyed by dotted name."""
    out: dict[str, str] = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"config line {i} is not `section.key = value`: {raw!r}")
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def fmt(x) -> str:
    """Numbers at 17 significant digits; infinities spelled out."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def write_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def append_run_record(log_path, command: str, config: dict, seed: int | None, summary: dict) -> None:
    from . import __version__

    canonical = json.dumps(config, sort_keys=True, default=str)
    record = {
        "time": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "command": command,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest()[:16],
        "seed": seed,
        "version": __version__,
        "summary": summary,
    }
    with open(log_path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True, default=str) + "\n")
