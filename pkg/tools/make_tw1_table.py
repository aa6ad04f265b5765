#!/usr/bin/env python3
"""Regenerate the shipped Tracy-Widom (order 1) CDF table.

Solves the Painleve II representation: with q'' = s q + 2 q^3 and
q(s) ~ Ai(s) as s -> +inf (the Hastings-McLeod solution),

    F2(s) = exp( -int_s^inf (x - s) q(x)^2 dx )
    F1(s) = sqrt(F2(s)) * exp( -1/2 int_s^inf q(x) dx )

The tail integrals are tracked as extra ODE state integrated from s = 10
downward, initialized with closed-form Airy tail identities:

    int_s^inf Ai^2 dx   = Ai'(s)^2 - s Ai(s)^2
    int_s^inf x Ai^2 dx = -(s^2 Ai^2 - s Ai'^2 + Ai Ai') / 3
    int_s^inf Ai dx     = 1/3 - int_0^s Ai dx

Accuracy is limited by the ODE tolerances (~1e-11 here), far beyond what
the interpolation layer needs.

Usage: python tools/make_tw1_table.py [out.txt]
"""

import sys

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import airy, itairy

S_START = 10.0
S_HI = 8.0
S_LO = -12.0
STEP = 0.005


def _rhs(s, y):
    q, qp, _, _, _ = y
    return [qp, s * q + 2.0 * q**3, -q * q, -s * q * q, -q]


def tw1_table(s_lo=S_LO, s_hi=S_HI, step=STEP):
    ai, aip, _, _ = airy(S_START)
    i2 = aip**2 - S_START * ai**2
    j2 = -(S_START**2 * ai**2 - S_START * aip**2 + ai * aip) / 3.0
    kk = 1.0 / 3.0 - itairy(S_START)[0]
    grid = np.arange(s_hi, s_lo - 0.5 * step, -step)
    sol = solve_ivp(
        _rhs,
        (S_START, s_lo),
        [ai, aip, i2, j2, kk],
        t_eval=np.concatenate(([S_START], grid)),
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
    )
    if not sol.success:
        raise RuntimeError(f"Painleve II integration failed: {sol.message}")
    s = sol.t[1:]
    _, _, i2, j2, kk = sol.y[:, 1:]
    log_f1 = -0.5 * (j2 - s * i2) - 0.5 * kk
    order = np.argsort(s)
    return s[order], np.exp(log_f1[order])


def main(argv):
    out = argv[1] if len(argv) > 1 else "src/royexact/data/tw1_cdf.txt"
    s, f = tw1_table()
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("s,F\n")
        for si, fi in zip(s, f):
            fh.write(f"{si:.6f},{fi:.15e}\n")
    print(f"wrote {len(s)} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
