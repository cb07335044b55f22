#!/usr/bin/env python3
"""Regenerate the checked-in golden CSVs under tests/golden/.

Each file is produced by the CLI itself, so the goldens pin the full
command-line path (config echo included).  Keep the parameter choices in sync
with tests/test_cli.py.
"""
import pathlib
import sys

from cavpurify.cli import main

GOLDEN = pathlib.Path(__file__).resolve().parent.parent / "tests" / "golden"

COMMANDS = {
    "fstar_sweep.csv": [
        "fstar-sweep", "--nbar-list", "10,50,100,200",
        "--gtau-min", "0.2", "--gtau-max", "4.0", "--gtau-step", "0.1",
        "--p", "0.0",
    ],
    "quad_dist_nbar100.csv": [
        "quad-dist", "--nbar", "100", "--gtau1", "2.0", "--n_f", "180",
        "--p-min", "-8", "--p-max", "8",
    ],
    "qfunc_nbar100.csv": [
        "qfunc", "--nbar", "100", "--gtau1", "2.0", "--n_f", "180",
        "--grid-step", "0.1",
    ],
    "purify_aD_ideal.csv": [
        "purify", "--protocol", "aD", "--backend", "ideal",
        "--initial", "psi:0.7", "--iterations", "5",
    ],
    "purify_aB_ideal.csv": [
        "purify", "--protocol", "aB", "--backend", "ideal",
        "--initial", "psi:0.7", "--iterations", "5",
    ],
    "purify_aD_kraus_fig6.csv": [
        "purify", "--protocol", "aD", "--backend", "kraus",
        "--initial", "psi:0.7", "--iterations", "5",
        "--nbar", "50", "--gtau1", "2.0", "--gtau2", "2.2", "--p", "0.5",
        "--n_f", "112",
    ],
    "resources_aD.csv": [
        "resources", "--protocol", "aD", "--F0", "0.7", "--target", "0.999999",
    ],
}


def run():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, argv in COMMANDS.items():
        path = GOLDEN / name
        code = main(argv + ["--output", str(path)])
        if code != 0:
            raise SystemExit(f"{name}: exit code {code}")
        print(f"wrote {path}")


if __name__ == "__main__":
    sys.exit(run())
