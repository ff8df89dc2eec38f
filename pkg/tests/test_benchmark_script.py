"""The kernel benchmark script runs end to end and reports a speedup table."""

import os
import subprocess
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
SCRIPT = REPO_ROOT / "benchmarks" / "kernel_benchmark.py"


def test_kernel_benchmark_compares_both_backends(tmp_path):
    env = dict(os.environ, WSPKIT_CACHE_DIR=str(tmp_path))
    res = subprocess.run(
        [sys.executable, str(SCRIPT), "--k-list", "5,6", "--n-mult", "2",
         "--seeds", "2", "--band-lo", "0.25", "--band-hi", "0.75"],
        capture_output=True, text=True, env=env, timeout=120)
    assert res.returncode == 0, res.stderr
    lines = res.stdout.splitlines()
    assert "pure_ms" in lines[0] and "compiled_ms" in lines[0]
    medians = [line for line in lines if "median" in line]
    assert len(medians) == 2  # one summary row per size
    data = [line for line in lines[1:] if "median" not in line]
    assert len(data) == 4  # sizes x seeds
    assert all(line.rstrip().endswith("x") for line in data)
