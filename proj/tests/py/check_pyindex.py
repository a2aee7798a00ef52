"""Evaluates every generated PyIndex case with CPython and compares golds."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def main() -> int:
    poskit = sys.argv[1]
    with tempfile.TemporaryDirectory() as out:
        subprocess.run(
            [poskit, "pyindex", "--seed", "42", "--out", out, "--set", "pyindex.per_category=400"],
            check=True,
            stdout=subprocess.DEVNULL,
        )
        mismatches = 0
        total = 0
        for line in Path(out, "pyindex.jsonl").read_text().splitlines():
            case = json.loads(line)
            header, expression = case["source_text"].split("\n")
            scope = {}
            exec(header, {}, scope)
            got = eval(expression, {}, scope)
            total += 1
            if got != case["gold"]:
                mismatches += 1
                print(f"mismatch {case['case_id']}: {case['source_text']!r} python={got} gold={case['gold']}")
    print(f"{total} cases, {mismatches} mismatches")
    return 1 if mismatches or total != 2000 else 0


if __name__ == "__main__":
    sys.exit(main())
