"""Run the acceptance suite and print only the per-criterion PASS/FAIL lines."""
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

proc = subprocess.run(
    [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(ROOT / "tests" / "test_acceptance.py")],
    capture_output=True, text=True, cwd=ROOT,
)
lines = [ln for ln in proc.stdout.splitlines() if ln.startswith("criterion ")]
print("\n".join(lines) if lines else proc.stdout)
sys.exit(0 if proc.returncode == 0 else 1)
