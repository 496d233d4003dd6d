"""Deterministic JSON and markdown rendering of command results."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .liealg import SIGN_CONVENTIONS

TENSOR_CONVENTION = "x ⊗ y acts by u -> <u, y> x; wedge = x⊗y - y⊗x; amp = x⊗y + y⊗x"


def conventions(pairing_kind: str | None = None, domain: str | None = None) -> dict:
    doc = {"tensor": TENSOR_CONVENTION, "coordinates": "basis labels in ascending order"}
    if pairing_kind:
        doc["pairing"] = pairing_kind
        doc["gram"] = SIGN_CONVENTIONS[pairing_kind]
    if domain:
        doc["index_domain"] = domain
    return doc


def digest(raw_inputs: dict) -> str:
    """sha256 over the named input byte strings, in name order."""
    h = hashlib.sha256()
    for name in sorted(raw_inputs):
        data = raw_inputs[name]
        h.update(name.encode())
        h.update(b"\0")
        h.update(data if isinstance(data, bytes) else str(data).encode())
        h.update(b"\0")
    return h.hexdigest()


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "detail": self.detail}


@dataclass
class Report:
    command: str
    conventions: dict
    inputs_digest: str
    result: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "conventions": self.conventions,
            "inputs_digest": self.inputs_digest,
            "result": self.result,
            "checks": [c.to_json() for c in self.checks],
            "pass": self.passed,
            "witnesses": self.witnesses,
        }

    def render_json(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def render_markdown(self) -> str:
        lines = [f"# flagstab {self.command}", "", "## Conventions", ""]
        for k in sorted(self.conventions):
            lines.append(f"- **{k}**: {self.conventions[k]}")
        lines += ["", "## Inputs", "", f"sha256 `{self.inputs_digest}`", ""]
        if self.result:
            lines += ["## Result", "", "```json"]
            lines.append(json.dumps(self.result, indent=2, sort_keys=True, ensure_ascii=False))
            lines += ["```", ""]
        lines += ["## Checks", "", "| check | result | detail |", "|---|---|---|"]
        for c in self.checks:
            detail = c.detail.replace("|", "\\|")
            lines.append(f"| {c.name} | {'pass' if c.passed else 'FAIL'} | {detail} |")
        lines += ["", "## Witnesses", ""]
        if self.witnesses:
            lines.append("```json")
            lines.append(json.dumps(self.witnesses, indent=2, sort_keys=True, ensure_ascii=False))
            lines.append("```")
        else:
            lines.append("none")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.render_markdown() if fmt == "markdown" else self.render_json()
