"""Reproducibility record emitted alongside every CLI output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


@dataclass(frozen=True)
class RunRecord:
    subcommand: str
    config: dict
    input_checksums: dict
    seed: int | None
    outputs: list
    tool_version: str = __version__
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "tool": "natvar",
            "tool_version": self.tool_version,
            "subcommand": self.subcommand,
            "config": self.config,
            "input_checksums": self.input_checksums,
            "seed": self.seed,
            "outputs": self.outputs,
            "notes": self.notes,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def write(self, base_output: str | Path) -> Path:
        path = Path(str(base_output) + ".run.json")
        path.write_text(self.to_json(), encoding="utf-8")
        return path
