"""One PASS/FAIL line per acceptance criterion, echoed in the pytest summary."""

LINES: dict = {}


def report(number: int, ok: bool, detail: str, seconds: float) -> bool:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}  [{seconds:.1f}s]"
    LINES[number] = line
    print(line)
    return ok
