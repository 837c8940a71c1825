# Independent numpy/mpmath evaluation of the two-photon model.
# Values printed here are pasted into tests/unit/test_physics_model.cpp.
import itertools
from math import comb, cos, sin, exp, pi, sqrt
import numpy as np

DEG = pi / 180


def table(theta, a, b, phi=0.0):
    psi = np.array([0, cos(theta), -np.exp(1j * phi) * sin(theta), 0], dtype=complex)
    va = np.array([-sin(a), cos(a)])
    vb = np.array([sin(b), cos(b)])
    pa = np.outer(va, va)
    pb = np.outer(vb, vb)
    eye = np.eye(2)
    rho = np.outer(psi, psi.conj())
    out = {}
    for sa, A in (("+", eye - pa), ("-", pa)):
        for sb, B in (("+", eye - pb), ("-", pb)):
            out[sa + sb] = float(np.real(np.trace(rho @ np.kron(A, B))))
    return out


def dv_enum(v, eta, dp, dm):
    # enumerate each pair's outcome (+ with weight dp, - with weight dm) and
    # each '-' pair's detector Bernoulli; count configurations with >=1 click
    tot = 0.0
    for cfg in itertools.product((0, 1), repeat=v):
        w = 1.0
        k = sum(cfg)
        for c in cfg:
            w *= dm if c else dp
        for det in itertools.product((0, 1), repeat=k):
            pw = 1.0
            for dd in det:
                pw *= eta if dd else (1 - eta)
            if any(det):
                tot += w * pw
    return tot


def outcome(theta, a, b, eta_a, eta_b, mu, tau, la, lb):
    t = table(theta, a, b)
    q00 = t["++"] + (1 - eta_a) * t["-+"] + (1 - eta_b) * t["+-"] + (1 - eta_a) * (1 - eta_b) * t["--"]
    qa = t["++"] + t["+-"] + (1 - eta_a) * (t["-+"] + t["--"])  # A silent
    qb = t["++"] + t["-+"] + (1 - eta_b) * (t["+-"] + t["--"])  # B silent
    ea, eb = exp(-la * tau), exp(-lb * tau)
    pmp = eb * (exp(-mu * (1 - qb)) - ea * exp(-mu * (1 - q00)))
    ppm = ea * (exp(-mu * (1 - qa)) - eb * exp(-mu * (1 - q00)))
    ppp = ea * eb * exp(-mu * (1 - q00))
    return ppp, pmp, ppm, 1 - ppp - pmp - ppm


REF = dict(theta=25.9 * DEG, a=(-7.2 * DEG, 28.7 * DEG), b=(82.7 * DEG, -61.5 * DEG),
             eta_a=0.824, eta_b=0.822, la=45.7, lb=41.5, rate=2.4e4)


def chsh(mu, P=REF):
    tau = mu / P["rate"]
    s = 0.0
    for x in (0, 1):
        for y in (0, 1):
            ppp, pmp, ppm, pmm = outcome(P["theta"], P["a"][x], P["b"][y], P["eta_a"], P["eta_b"], mu, tau, P["la"], P["lb"])
            e = 1 - 2 * (pmp + ppm)
            s += -e if x == y == 1 else e
    return s


if __name__ == "__main__":
    print("table pi/4 a=0 b=pi/4", table(pi / 4, 0, pi / 4))
    for x in (0, 1):
        for y in (0, 1):
            print("reference table", x, y, repr(table(REF["theta"], REF["a"][x], REF["b"][y])))
    t = table(REF["theta"], REF["a"][0], REF["b"][0])
    eb = 0.822
    print("D(alpha) eta_b=.822 (+,-):", repr(t["++"] + (1 - eb) * t["+-"]), repr(t["-+"] + (1 - eb) * t["--"]))
    print("D3 enum", repr(dv_enum(3, 0.5, 0.7, 0.2)))
    for mu in (0.05, 0.322, 1.0, 1e-6, 50):
        print("S", mu, repr(chsh(mu)))
    for x in (0, 1):
        for y in (0, 1):
            print("dist mu=.322", x, y, [repr(v) for v in outcome(REF["theta"], REF["a"][x], REF["b"][y], .824, .822, .322, .322 / 2.4e4, 45.7, 41.5)])
