"""Collects one verdict line per acceptance criterion for the terminal summary."""
RESULTS = []


def record(label: str, passed: bool, detail: str) -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
    RESULTS.append(line)
    print(line)
    return line
