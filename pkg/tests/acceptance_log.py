"""Collects one PASS/FAIL line per acceptance criterion for the session summary."""

LINES: list[str] = []


def report(number: int, title: str, checks: dict[str, bool]) -> bool:
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
    if failed:
        line += " [failed: " + "; ".join(failed) + "]"
    LINES.append(line)
    print(line)
    return ok
