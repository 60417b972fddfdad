"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

from __future__ import annotations

LINES: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} -- {detail}"
    LINES[number] = line
    print(line)
