"""
Rapports des commandes: modèle pydantic, schéma JSON, rendu texte
"""

import json
from typing import Any, Optional

import jsonschema
from pydantic import BaseModel, ConfigDict, Field

from src.errors import InvariantViolationError, ToolkitError
from src.normal_map import Verdict

SCHEMA_VERSION = 1

REPORT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema", "command", "results", "checks", "exit_code"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "command": {"type": "array", "items": {"type": "string"}},
        "results": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed"],
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "skipped": {"type": "boolean"},
                    "detail": {"type": "object"},
                },
            },
        },
        "exit_code": {"type": "integer", "enum": [0, 1, 2, 3]},
        "error": {
            "type": ["object", "null"],
            "required": ["type", "message"],
            "properties": {
                "type": {"type": "string"},
                "message": {"type": "string"},
                "witness": {"type": "object"},
            },
        },
    },
}


class CheckRecord(BaseModel):
    name: str
    passed: bool
    skipped: bool = False
    detail: dict[str, Any] = {}

    @classmethod
    def from_verdict(cls, name: str, verdict: Verdict) -> "CheckRecord":
        detail = {"violations": [{"kind": v.kind, **v.witness} for v in verdict.violations]} if not verdict.ok else {}
        return cls(name=name, passed=verdict.ok, detail=detail)


class Report(BaseModel):
    """Résultat d'une commande; le rendu texte est dérivé du corps JSON"""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    command: list[str] = []
    results: dict[str, Any] = {}
    checks: list[CheckRecord] = []
    exit_code: int = 0
    error: Optional[dict[str, Any]] = None

    @property
    def failed(self) -> list[CheckRecord]:
        return [c for c in self.checks if not c.passed]

    def record_error(self, error: ToolkitError):
        self.error = {"type": type(error).__name__, "message": error.message, "witness": _plain(error.witness)}
        self.exit_code = error.exit_code

    def settle(self) -> int:
        """Code de sortie final: une vérification échouée vaut violation d'invariant"""
        if self.error is None and self.failed:
            self.exit_code = InvariantViolationError.exit_code
        return self.exit_code

    def body(self) -> dict[str, Any]:
        return _plain(self.model_dump(by_alias=True))


def _plain(value: Any) -> Any:
    """Convertit les scalaires numpy et tuples pour la sérialisation"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def _text_lines(body: dict[str, Any]) -> list[str]:
    lines = ["command: " + " ".join(body["command"])]
    for key in sorted(body["results"]):
        lines.append(f"{key}: {json.dumps(body['results'][key], sort_keys=True, ensure_ascii=False)}")
    checks = body["checks"]
    failed = [c for c in checks if not c["passed"]]
    skipped = [c for c in checks if c.get("skipped")]
    summary = f"{len(checks)} checks, {len(failed)} failed"
    if skipped:
        summary += f", {len(skipped)} skipped"
    lines.append(summary)
    for check in failed:
        lines.append(f"  FAILED {check['name']}: {json.dumps(check.get('detail', {}), sort_keys=True)}")
    if body.get("error"):
        lines.append(f"error: {body['error']['type']}: {body['error']['message']}")
    lines.append(f"exit: {body['exit_code']}")
    return lines


def emit_report(report: Report, fmt: str = "text") -> bytes:
    """Rendu text ou json; le corps est validé contre REPORT_SCHEMA"""
    body = report.body()
    jsonschema.validate(body, REPORT_SCHEMA)
    if fmt == "json":
        return (json.dumps(body, sort_keys=True, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    if fmt != "text":
        raise ValueError(f"format inconnu: {fmt}")
    return ("\n".join(_text_lines(body)) + "\n").encode("utf-8")
