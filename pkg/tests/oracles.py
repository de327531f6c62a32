"""Independent reference implementations used as test oracles.

Everything here is deliberately written as straight-line code that shares
no routines with the package under test. Expected values frozen into the
test modules were produced by running these oracles first.
"""

import math


def pmv_reference(ta, tr, vel, rh, met, clo, wme=0.0):
    """Classic comfort-index iteration in scaled-Kelvin form.

    Ported from the well-known BASIC listing: clothing temperature is
    iterated as xn = tcl_kelvin/100 with interval averaging, which is a
    different numerical route from the package's damped fixed point in
    degrees Celsius.

    Returns (pmv, ppd, tcl_celsius).
    """
    pa = rh * 10.0 * math.exp(16.6536 - 4030.183 / (ta + 235.0))
    icl = 0.155 * clo
    m = met * 58.15
    w = wme * 58.15
    mw = m - w
    if icl <= 0.078:
        fcl = 1.0 + 1.29 * icl
    else:
        fcl = 1.05 + 0.645 * icl
    hcf = 12.1 * math.sqrt(vel)
    taa = ta + 273.0
    tra = tr + 273.0

    tcla = taa + (35.5 - ta) / (3.5 * (6.45 * icl + 0.1))
    p1 = icl * fcl
    p2 = p1 * 3.96
    p3 = p1 * 100.0
    p4 = p1 * taa
    p5 = 308.7 - 0.028 * mw + p2 * (tra / 100.0) ** 4
    xn = tcla / 100.0
    xf = xn / 2.0
    eps = 0.00015
    n = 0
    hc = hcf
    while abs(xn - xf) > eps:
        xf = (xf + xn) / 2.0
        hcn = 2.38 * abs(100.0 * xf - taa) ** 0.25
        hc = hcf if hcf > hcn else hcn
        xn = (p5 + p4 * hc - p2 * xf ** 4) / (100.0 + p3 * hc)
        n += 1
        if n > 150:
            raise RuntimeError("clothing temperature iteration did not converge")
    tcl = 100.0 * xn - 273.0

    hl1 = 3.05 * 0.001 * (5733.0 - 6.99 * mw - pa)
    hl2 = 0.42 * (mw - 58.15) if mw > 58.15 else 0.0
    hl3 = 1.7e-5 * m * (5867.0 - pa)
    hl4 = 0.0014 * m * (34.0 - ta)
    hl5 = 3.96 * fcl * (xn ** 4 - (tra / 100.0) ** 4)
    hl6 = fcl * hc * (tcl - ta)
    ts = 0.303 * math.exp(-0.036 * m) + 0.028
    pmv = ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6)
    ppd = 100.0 - 95.0 * math.exp(-0.03353 * pmv ** 4 - 0.2179 * pmv ** 2)
    return pmv, ppd, tcl


def globe_mrt_reference(tg, ta, exponent):
    """Direct one-expression evaluation of the 150 mm globe correction."""
    radicand = (tg + 273.0) ** 4 + 0.4e8 * abs(tg - ta) ** exponent * (tg - ta)
    if radicand <= 0.0:
        raise ValueError("radicand not positive")
    return radicand ** 0.25 - 273.0


def clothing_temperature_reference(ta, tr, vel, m, w, icl, tol=1e-9):
    """Plain undamped fixed point on the clothing-surface balance, run to a
    much tighter tolerance than the implementation under test."""
    if icl <= 0.078:
        fcl = 1.0 + 1.29 * icl
    else:
        fcl = 1.05 + 0.645 * icl
    tcl = ta
    for _ in range(20000):
        hc = max(2.38 * abs(tcl - ta) ** 0.25, 12.1 * math.sqrt(vel))
        rad = 3.96e-8 * fcl * ((tcl + 273.0) ** 4 - (tr + 273.0) ** 4)
        nxt = 35.7 - 0.028 * (m - w) - icl * (rad + fcl * hc * (tcl - ta))
        # plain averaging keeps the undamped iteration from ringing
        nxt = 0.5 * (tcl + nxt)
        if abs(nxt - tcl) < tol:
            return nxt, max(2.38 * abs(nxt - ta) ** 0.25, 12.1 * math.sqrt(vel))
        tcl = nxt
    raise RuntimeError("reference iteration did not converge")


def otsu_reference(pixels):
    """Exhaustive between-class-variance scan over all 256 thresholds.

    pixels: flat iterable of 0..255 ints. Returns the argmax threshold with
    ties broken toward the lowest threshold, or None if the image is
    constant. Class 0 is `value <= t`.
    """
    hist = [0] * 256
    n = 0
    for v in pixels:
        hist[int(v)] += 1
        n += 1
    if sum(1 for h in hist if h > 0) < 2:
        return None
    best_t, best_var = None, -1.0
    for t in range(256):
        n0 = sum(hist[: t + 1])
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = sum(i * hist[i] for i in range(t + 1)) / n0
        mu1 = sum(i * hist[i] for i in range(t + 1, 256)) / n1
        var = (n0 / n) * (n1 / n) * (mu0 - mu1) ** 2
        if var > best_var + 1e-12:
            best_var = var
            best_t = t
    return best_t


def quantile_reference(values, q):
    """Sort + linear interpolation quantile, written out longhand."""
    xs = sorted(values)
    pos = (len(xs) - 1) * q
    lo = int(math.floor(pos))
    hi = int(math.ceil(pos))
    if lo == hi:
        return xs[lo]
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])


def varint_reference(value):
    """7-bit-per-byte variable length integer, longhand."""
    out = []
    while True:
        digit = value % 128
        value //= 128
        if value > 0:
            digit |= 0x80
        out.append(digit)
        if value == 0:
            return bytes(out)
