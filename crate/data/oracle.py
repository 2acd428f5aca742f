"""Independent reference values for data/golden.json.

sigma: symbolic sub-Laplacian of u = (4t^2 + (|z|^2 + lam)^2)^(-n/2).
periods / crossings: scipy DOP853 at rtol 1e-13 with event location.
"""
import json
import sys

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp


def sigma(n, lam):
    xs = sp.symbols(f"x1:{n + 1}", real=True)
    ys = sp.symbols(f"y1:{n + 1}", real=True)
    t = sp.Symbol("t", real=True)
    r2 = sum(x**2 + y**2 for x, y in zip(xs, ys))
    lam = sp.nsimplify(lam)
    u = (4 * t**2 + (r2 + lam) ** 2) ** sp.Rational(-n, 2)
    lap = 0
    for x, y in zip(xs, ys):
        ex = lambda f: sp.diff(f, x) + y * sp.diff(f, t)
        ey = lambda f: sp.diff(f, y) - x * sp.diff(f, t)
        lap += ex(ex(u)) + ey(ey(u))
    ratio = lap / u ** (1 + sp.Rational(2, n))
    pt = {v: sp.Rational(k + 2, 7) for k, v in enumerate(xs + ys)}
    pt[t] = sp.Rational(3, 11)
    return float(sp.N(ratio.subs(pt), 30))


def field(n, c):
    def f(_s, q):
        a, b = q
        return [-a * a + (b - c) * ((2 * n - 1) * b + c) / (4 * n * n), -2 * n * b * a]

    return f


def crossing(n, c, q0, direction):
    ev = lambda s, q: q[0]
    ev.terminal = True
    ev.direction = 0
    f = field(n, c)
    span = (0.0, direction * 1e4)
    # leave the axis before arming the event
    first = solve_ivp(f, (0.0, direction * 1e-3), q0, method="DOP853", rtol=1e-13, atol=1e-14)
    s1, y1 = first.t[-1], first.y[:, -1]
    sol = solve_ivp(f, (s1, span[1]), y1, method="DOP853", rtol=1e-13, atol=1e-14, events=ev)
    return float(sol.t_events[0][0]), float(sol.y_events[0][0][1])


def main():
    out = {"sigma": [], "periods": [], "crossings": []}
    for n in (2, 3):
        for lam in (0.5, 1.0, 2.0):
            out["sigma"].append({"n": n, "lambda": lam, "value": sigma(n, lam)})
    for n, c, a0, b0 in [(2, 1.0, 0.0, 2.0), (2, 1.0, 0.5, 2.0), (2, 1.0, 0.0, -0.6), (3, 2.0, 0.0, 5.0)]:
        sp_, bp = crossing(n, c, [a0, b0], 1.0)
        sm, bm = crossing(n, c, [a0, b0], -1.0)
        # a seed on the beta-axis is itself one of the two crossings
        period = 2 * sp_ if a0 == 0.0 else 2 * (sp_ - sm)
        if a0 == 0.0:
            assert abs(sp_ + sm) < 1e-9, (sp_, sm)
        out["periods"].append({"n": n, "c": c, "alpha": a0, "beta": b0, "period": period})
        if a0 != 0.0:
            out["crossings"].append({"n": n, "c": c, "alpha": a0, "beta": b0, "s": sp_, "beta_cross": bp})
    json.dump(out, sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
