"""High-precision reference tracer for the Sinai torus table.

Brute-force unfolding: every periodic image of the scatterer within a fixed
window is intersected with the ray and the nearest root wins. Used to freeze
expected values in the Rust test suite.

Conventions: scatterer boundary traversed clockwise (table on the left),
s = 0 at angle 0, inward normal points away from the scatterer, outgoing
velocity v = cos(phi) n + sin(phi) T.
"""
import sys
from mpmath import mp, mpf, cos, sin, sqrt, atan2, pi

mp.dps = 60

CX, CY, RHO = mpf("0.5"), mpf("0.5"), mpf("0.2")
PER = 2 * pi * RHO
WINDOW = 30


def frame(s):
    th = -s / RHO
    p = (CX + RHO * cos(th), CY + RHO * sin(th))
    t = (sin(th), -cos(th))
    n = (cos(th), sin(th))
    return p, t, n


def step(s, phi):
    p, t, n = frame(s)
    v = (cos(phi) * n[0] + sin(phi) * t[0], cos(phi) * n[1] + sin(phi) * t[1])
    best = None
    for i in range(-WINDOW, WINDOW + 1):
        for j in range(-WINDOW, WINDOW + 1):
            cx, cy = CX + i, CY + j
            dx, dy = p[0] - cx, p[1] - cy
            b = dx * v[0] + dy * v[1]
            c = dx * dx + dy * dy - RHO * RHO
            disc = b * b - c
            if disc < 0:
                continue
            root = -b - sqrt(disc)
            if root <= mpf("1e-30"):
                continue
            if best is None or root < best[0]:
                best = (root, cx, cy)
    tau, cx, cy = best
    hx, hy = p[0] + tau * v[0], p[1] + tau * v[1]
    th = atan2(hy - cy, hx - cx)
    s2 = (-th * RHO) % PER
    _, t2, n2 = frame(s2)
    dot = v[0] * n2[0] + v[1] * n2[1]
    w = (v[0] - 2 * dot * n2[0], v[1] - 2 * dot * n2[1])
    phi2 = atan2(w[0] * t2[0] + w[1] * t2[1], w[0] * n2[0] + w[1] * n2[1])
    return s2, phi2, tau


def in_hole(s, center, r):
    d = (s - center) % PER
    return d <= r or d >= PER - r


if __name__ == "__main__":
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    for s0, phi0 in [(mpf(0), mpf("0.3")), (mpf("0.4"), mpf("-0.7"))]:
        s, phi = s0, phi0
        hits = []
        print(f"# start s={s0} phi={phi0}")
        for k in range(1, steps + 1):
            s, phi, tau = step(s, phi)
            if in_hole(s, mpf(0), mpf("0.05")):
                hits.append(k)
            print(f"{k} {mp.nstr(s, 20)} {mp.nstr(phi, 20)} {mp.nstr(tau, 20)}")
        print("# hits", hits)
