"""Run the acceptance suite and print one verdict line per criterion."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    args = [sys.executable, "-m", "pytest", "-q", "-rN", str(ROOT / "tests" / "test_acceptance.py"), *sys.argv[1:]]
    sys.exit(subprocess.call(args, cwd=ROOT))
