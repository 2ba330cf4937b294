"""Run the acceptance suite and print its PASS/FAIL summary lines.

    python3 scripts/run_acceptance.py
"""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(ROOT / "tests" / "test_acceptance.py")],
        cwd=ROOT, capture_output=True, text=True, check=False,
    )
    lines = [line for line in proc.stdout.splitlines() if line.startswith("criterion ")]
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        print(line)
    print(proc.stdout.strip().splitlines()[-1])
    sys.exit(proc.returncode)


if __name__ == "__main__":
    main()
