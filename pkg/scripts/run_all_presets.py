#!/usr/bin/env python3
"""Run every preset into out/<name>/ and print a pass/fail table.

Usage: python scripts/run_all_presets.py [out_root]
"""

import sys
import time

from mixedflow.presets import PRESET_NAMES, run_experiment


def main() -> int:
    out_root = sys.argv[1] if len(sys.argv) > 1 else "out"
    failures = []
    for name in PRESET_NAMES:
        t0 = time.perf_counter()
        result = run_experiment(name, out_dir=f"{out_root}/{name}")
        dt = time.perf_counter() - t0
        status = "PASS" if result.passed else "FAIL"
        print(f"{name:24s} {status}  ({dt:6.1f}s)  -> {result.out_dir}")
        for check in result.checks:
            print(f"    {check.line()}")
        if not result.passed:
            failures.append(name)
    if failures:
        print("failed presets: " + ", ".join(failures))
        return 1
    print("all presets passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
