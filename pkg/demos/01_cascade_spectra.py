#!/usr/bin/env python3
"""Cascade ground truth vs estimated spectra.

A four-weight multiplicative cascade has closed-form mass exponents, so
it makes an exact yardstick for the estimators: this script generates
one, runs the moment route (tau, D(q)) and the direct route (alpha, f),
and prints both against the closed forms. Curves are exported as TSV
into demo_output/, plus PNG plots when matplotlib is available.
"""

import pathlib

import numpy as np

from mfia import cascade, spectra

WEIGHTS = (0.4, 0.3, 0.2, 0.1)
OUT = pathlib.Path(__file__).resolve().parent.parent / "demo_output" / "cascade_spectra"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    spec = cascade.CascadeSpec(weights=WEIGHTS, depth=8, shuffle=True, seed=7)
    grid = cascade.generate_cascade(spec)
    print("cascade: weights %s, depth %d -> %dx%d grid" % (WEIGHTS, spec.depth, grid.side, grid.side))

    tau = spectra.estimate_tau(grid)
    dq = spectra.generalized_dimensions(tau)
    direct = spectra.chhabra_spectrum(grid)
    legendre = spectra.legendre_spectrum(tau)
    exact = cascade.analytic_tau_spectrum(WEIGHTS, tau.q)

    print("\n   q     tau(est)  tau(exact)   D(est)   D(exact)")
    for qq in (-5.0, -2.0, 0.0, 1.0, 2.0, 5.0):
        i = int(np.where(tau.q == qq)[0][0])
        print(
            "%5.1f  %9.4f  %9.4f  %8.4f  %8.4f"
            % (qq, tau.tau[i], exact.tau[i], dq.d[i], exact.d[i])
        )

    print("\n   q   alpha(est) alpha(exact)   f(est)  f(exact)")
    for qq in (-5.0, 0.0, 1.0, 2.0, 5.0):
        i = int(np.where(direct.q == qq)[0][0])
        print(
            "%5.1f  %9.4f  %10.4f  %8.4f  %8.4f"
            % (qq, direct.alpha[i], exact.alpha[i], direct.f[i], exact.f[i])
        )

    scales = spectra.default_scales(grid.side)
    for name, curve in (("tau", tau), ("dq", dq), ("chhabra", direct), ("legendre", legendre)):
        spectra.write_curve_tsv(curve, OUT / ("%s.tsv" % name), scales=scales)
    print("\ncurves written to %s" % OUT)

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping plots")
        return

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    ax1.plot(dq.q, dq.d, "o", ms=3, label="estimated")
    ax1.plot(exact.q, exact.d, "-", label="closed form")
    ax1.set_xlabel("q")
    ax1.set_ylabel("D(q)")
    ax1.legend()
    ax2.plot(direct.alpha, direct.f, "o", ms=3, label="direct method")
    ax2.plot(legendre.alpha, legendre.f, "s", ms=3, label="Legendre")
    ax2.plot(exact.alpha, exact.f, "-", label="closed form")
    ax2.set_xlabel("alpha")
    ax2.set_ylabel("f(alpha)")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(OUT / "spectra.png", dpi=150)
    print("plot written to %s" % (OUT / "spectra.png"))


if __name__ == "__main__":
    main()
