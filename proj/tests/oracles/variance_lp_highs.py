"""Independent HiGHS solve of the grid variance LP; prints the values frozen in
test_certificates.cpp and used by AC-6.

Usage: python3 variance_lp_highs.py
"""
import numpy as np
from scipy.optimize import linprog

MONOMIALS = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]


def region_points(theta, t, sigma, gamma, step, side):
    u = np.array([np.sin(theta), -np.cos(theta)])
    v = np.array([np.sin(theta), np.cos(theta)])
    t1 = t * np.sin(theta)
    t2 = (1 + sigma) * t1
    lim = int(np.ceil(1 / step))
    pts = []
    for i in range(-lim, lim + 1):
        for j in range(-lim, lim + 1):
            z = np.array([i * step, j * step])
            if np.linalg.norm(z) > 1:
                continue
            m1, m2 = u @ z + t1, v @ z + t2
            if min(abs(m1), abs(m2)) < gamma:
                continue
            label = 1 if (m1 >= 0 and m2 >= 0) else -1
            if label == side:
                pts.append(z)
    return np.array(pts)


def variance_lp(theta, t, sigma, gamma, step, side):
    """Max (positive side) or min (negative side) of the common second moment."""
    P = region_points(theta, t, sigma, gamma, step, side)
    n = len(P)
    rows = []
    for a, b in MONOMIALS:
        row = np.concatenate([P[:, 0] ** a * P[:, 1] ** b, [0.0]])
        if (a, b) in [(2, 0), (0, 2)]:
            row[-1] = -1.0
        rows.append(row)
    A_eq = np.vstack(rows + [np.r_[np.ones(n), 0.0]])
    b_eq = np.r_[np.zeros(len(MONOMIALS)), 1.0]
    c = np.zeros(n + 1)
    c[-1] = -side
    r = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n + [(None, None)], method="highs")
    return (r.x[-1] if r.status == 0 else None), n


if __name__ == "__main__":
    for p in [(0.3, 0.9, 0.5), (0.4, 0.6, 0.5), (0.5, 0.4, 0.5), (0.2, 0.9, 0.5), (0.4, 0.4, 0.0)]:
        pos = variance_lp(*p, 0.02, 0.02, 1)
        neg = variance_lp(*p, 0.02, 0.02, -1)
        print(p, "positive %.10f (%d points)" % pos, "negative %.10f (%d points)" % neg)
    th = np.pi / 3
    print("pi/3 step 0.01 positive", variance_lp(th, 0.3, 0.5, 0.02, 0.01, 1))
    print("pi/3 step 0.01 negative", variance_lp(th, 0.3, 0.5, 0.02, 0.01, -1))
