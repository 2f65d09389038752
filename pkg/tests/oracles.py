"""Independent reference implementations used only by the tests.

Nothing here calls into the package's estimators: plain loops over
realizations, lags and samples.
"""

import math


def brute_force_correlation(i1, i2, step, lags, coherence_time):
    """Naive ``g2`` estimate with delta-method errors and peak metrics.

    ``i1`` and ``i2`` are lists of per-realization intensity lists.
    """
    R = len(i1)
    K = len(i1[0])
    js = [int(round(tau / step)) for tau in lags]

    a = [sum(row) / K for row in i1]
    b = [sum(row) / K for row in i2]
    num = []
    for r in range(R):
        row = []
        for j in js:
            total = 0.0
            count = 0
            for k in range(K):
                if 0 <= k + j < K:
                    total += i1[r][k] * i2[r][k + j]
                    count += 1
            row.append(total / count)
        num.append(row)

    ma = sum(a) / R
    mb = sum(b) / R
    g2, se = [], []
    for l in range(len(js)):
        mn = sum(num[r][l] for r in range(R)) / R
        g = mn / (ma * mb)
        psi = [
            (num[r][l] - mn) / (ma * mb) - g * ((a[r] - ma) / ma + (b[r] - mb) / mb)
            for r in range(R)
        ]
        mp = sum(psi) / R
        var = sum((p - mp) ** 2 for p in psi) / (R - 1)
        g2.append(g)
        se.append(math.sqrt(var / R))

    far = [g for tau, g in zip(lags, g2) if abs(tau) > 10 * coherence_time]
    background = sum(far) / len(far)
    z = min(range(len(lags)), key=lambda l: abs(lags[l]))
    peak = g2[z]

    excess = [g - background for g in g2]
    half = excess[z] / 2
    right = left = None
    for l in range(z + 1, len(lags)):
        if excess[l] <= half:
            x0, x1, y0, y1 = lags[l - 1], lags[l], excess[l - 1], excess[l]
            right = x0 + (y0 - half) * (x1 - x0) / (y0 - y1)
            break
    for l in range(z - 1, -1, -1):
        if excess[l] <= half:
            x0, x1, y0, y1 = lags[l + 1], lags[l], excess[l + 1], excess[l]
            left = x0 + (y0 - half) * (x1 - x0) / (y0 - y1)
            break
    fwhm = right - left if right is not None and left is not None else float("nan")
    return {"g2": g2, "stderr": se, "background": background, "peak": peak, "fwhm": fwhm}


def brute_force_field(offsets, amplitudes, phases, times):
    """Mode sum evaluated term by term."""
    out = []
    for t in times:
        z = 0j
        for w, c, p in zip(offsets, amplitudes, phases):
            z += c * complex(math.cos(p - w * t), math.sin(p - w * t))
        out.append(z)
    return out
