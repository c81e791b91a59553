"""Severity-tagged findings shared by validation and derivation steps."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code}: {self.message}"


def errors(diagnostics) -> list["Diagnostic"]:
    return [d for d in diagnostics if d.severity == "error"]


def warnings(diagnostics) -> list["Diagnostic"]:
    return [d for d in diagnostics if d.severity == "warning"]
