"""One result line per acceptance criterion, collected for the terminal summary."""
LINES: dict[str, str] = {}


def record(cid: str, passed: bool, detail: str) -> bool:
    line = f"{cid} {'PASS' if passed else 'FAIL'}  {detail}"
    LINES[cid] = line
    print(line)
    return passed
