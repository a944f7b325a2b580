#!/usr/bin/env python3
"""Run the full delta-ladder study for a config (default: the pinned cubic
family) and write report.json / samples.csv / fit_table.csv.

Usage: python scripts/run_study.py [CONFIG] [OUT_DIR]
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from splitforge.cli import main  # noqa: E402

if __name__ == "__main__":
    config = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "configs", "cubic.json")
    out = sys.argv[2] if len(sys.argv) > 2 else "study_out"
    sys.exit(main(["study", "--config", config, "--out", out]))
