"""Run configuration and deterministic, replayable JSON run reports.

Every command-line run produces one JSON document with a stable key order:
tool version, a full echo of the effective configuration (seed, bounds,
worker count, and any environment override), the inputs, a list of check
records, and a summary.  Check records are self-contained — they reference
structures by index into the report's own serialized structure table and
carry every parameter needed to re-verify the verdict later — so a report
plus the `replay` subcommand is a complete audit trail.

Timing is recorded only when explicitly requested (`--timing`); by default
the field stays null so that two runs with equal inputs and configuration
produce byte-identical reports.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

from .errors import ValidationError
from .structures import Structure, serialize_structure

TOOL_VERSION = "0.1.0"

BOUNDS_ENV_VAR = "FMLOCAL_BOUNDS"

# Background bounds: canonical-form universe ceiling, hom-set enumeration
# limit, default size ceiling for bounded-core searches, default radius
# ceiling for locality rank searches, and the default round count.
DEFAULT_BOUNDS = {
    "canonical_size": 10,
    "hom_limit": 200000,
    "kcore_size": 6,
    "d_max": 2,
    "k_max": 4,
}

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


def bounds_from_env(raw: str | None) -> dict[str, int]:
    """Defaults overlaid with a ``name=value,name=value`` override string
    (the FMLOCAL_BOUNDS format); unknown names and non-positive values are
    rejected."""
    bounds = dict(DEFAULT_BOUNDS)
    if not raw:
        return bounds
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        name, eq, value = part.partition("=")
        name = name.strip()
        if not eq:
            raise ValidationError(f"bound override {part!r} is not name=value")
        if name not in DEFAULT_BOUNDS:
            raise ValidationError(
                f"unknown bound {name!r}; expected one of {sorted(DEFAULT_BOUNDS)}"
            )
        try:
            number = int(value.strip())
        except ValueError:
            raise ValidationError(f"bound {name!r} has non-integer value {value!r}") from None
        if number <= 0:
            raise ValidationError(f"bound {name!r} must be positive")
        bounds[name] = number
    return bounds


@dataclass(frozen=True)
class RunConfig:
    """Everything that influences a run beyond its positional inputs."""

    seed: int = 0
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    jobs: int = 1
    out: str | None = None
    bounds_env: str | None = None

    def __post_init__(self):
        if self.jobs < 1:
            raise ValidationError("worker count must be >= 1")
        for name in DEFAULT_BOUNDS:
            if self.bounds.get(name, 0) <= 0:
                raise ValidationError(f"bound {name!r} must be positive")

    def echo(self) -> dict:
        return {
            "bounds": {k: self.bounds[k] for k in sorted(self.bounds)},
            "bounds_env": self.bounds_env,
            "jobs": self.jobs,
            "seed": self.seed,
        }


class ReportBuilder:
    """Accumulates one run's structures, checks, and summary."""

    def __init__(self, subcommand: str, config: RunConfig):
        self.subcommand = subcommand
        self.config = config
        self.structures: list[str] = []
        self._structure_index: dict[str, int] = {}
        self.checks: list[dict] = []
        self.inputs: dict = {}
        self.interpretations: dict = {}
        self.summary: dict = {}

    def structure_index(self, s: Structure) -> int:
        """Embed a structure (deduplicated by serialized text) and return
        its index in the report's structure table."""
        text = serialize_structure(s)
        got = self._structure_index.get(text)
        if got is None:
            got = len(self.structures)
            self.structures.append(text)
            self._structure_index[text] = got
        return got

    def add_check(self, check_kind: str, **fields) -> int:
        if "kind" in fields or "index" in fields:
            raise ValidationError("check fields may not shadow 'kind' or 'index'")
        index = len(self.checks)
        record = {"index": index, "kind": check_kind}
        record.update(fields)
        self.checks.append(record)
        return index

    def set_inputs(self, **fields) -> None:
        self.inputs.update(fields)

    def set_interpretation(self, name: str, text: str) -> None:
        """Record a semantic reading this check depends on, so results are
        auditable against alternative readings."""
        self.interpretations[name] = text

    def set_summary(self, **fields) -> None:
        self.summary.update(fields)

    def finish(self, timing: dict | None = None) -> dict:
        return {
            "checks": self.checks,
            "config": self.config.echo(),
            "inputs": self.inputs,
            "interpretations": self.interpretations,
            "structures": self.structures,
            "subcommand": self.subcommand,
            "summary": self.summary,
            "timing": timing,
            "tool": {"name": "fmlocal", "version": TOOL_VERSION},
        }


def render_report(report: dict) -> str:
    """Canonical serialization: sorted keys, two-space indent, newline."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def emit_report(report: dict, out: str | None) -> str:
    """Write the canonical rendering to `out`, or stdout when no path is
    given; returns the rendered text."""
    text = render_report(report)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def load_report(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    if not isinstance(report, dict) or "checks" not in report:
        raise ValidationError(f"{path} is not a run report")
    return report
