"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}"
    LINES.append(line)
    print(line)
