#!/usr/bin/env python3
"""Regenerate the figure-level data sets at desk scale into results/.

Covers: the phase-space picture and quadrature distribution after the two
interactions, the postselection-fidelity sweep, the one-round protocol
comparison, the noisy Kraus-backend iterations, and the resource table.
The lossy-channel sweep lives in channel_sweep.py because it runs for
minutes, not seconds.
"""
import pathlib
import sys

import numpy as np

from cavpurify import compare_protocols
from cavpurify.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"


def run():
    OUT.mkdir(exist_ok=True)
    jobs = {
        "qfunc.csv": ["qfunc", "--nbar", "100", "--gtau1", "2.0", "--n_f", "180"],
        "quad_dist.csv": ["quad-dist", "--nbar", "100", "--gtau1", "2.0", "--n_f", "180"],
        "fstar_sweep.csv": ["fstar-sweep", "--p", "0.0"],
        "purify_aD_ideal.csv": ["purify", "--protocol", "aD", "--initial", "psi:0.7",
                                "--iterations", "8"],
        "purify_aB_ideal.csv": ["purify", "--protocol", "aB", "--initial", "psi:0.7",
                                "--iterations", "8"],
        "purify_aD_kraus.csv": ["purify", "--protocol", "aD", "--backend", "kraus",
                                "--initial", "psi:0.7", "--iterations", "8",
                                "--nbar", "100", "--gtau1", "2.0", "--gtau2", "2.2",
                                "--p", "0.5", "--n_f", "180"],
        "purify_aB_kraus.csv": ["purify", "--protocol", "aB", "--backend", "kraus",
                                "--initial", "psi:0.7", "--iterations", "8",
                                "--nbar", "100", "--gtau1", "2.0", "--gtau2", "2.2",
                                "--p", "0.5", "--n_f", "180"],
        "resources.csv": ["resources", "--protocol", "aD", "--F0", "0.7",
                          "--target", "0.999999"],
    }
    for name, argv in jobs.items():
        code = main(argv + ["--output", str(OUT / name)])
        if code != 0:
            raise SystemExit(f"{name}: exit {code}")
        print(f"wrote {OUT / name}")

    # single-round comparison of both protocols over the input fidelity
    rows = compare_protocols(np.linspace(0.50, 1.0, 51))
    with open(OUT / "protocol_comparison.csv", "w") as fh:
        fh.write("# one purification round on rho_psi(F) inputs\n")
        fh.write("F,F_next_aB,P_aB,F_next_aD,P_aD\n")
        for r in rows:
            fh.write(f"{r.fidelity!r},{r.f_next_aB!r},{r.p_aB!r},{r.f_next_aD!r},{r.p_aD!r}\n")
    print(f"wrote {OUT / 'protocol_comparison.csv'}")


if __name__ == "__main__":
    sys.exit(run())
