"""Statistical kernels for the verification experiments."""
from __future__ import annotations

import numpy as np
from scipy import stats as sstats


def chi_square_gof(observed, expected, min_expected=5.0):
    """Goodness of fit of observed counts against expected probabilities.

    Cells whose expected count falls below min_expected are merged into one
    pooled cell.  Returns (statistic, p_value); a single surviving cell gives
    p = 1 by convention.
    """
    total = sum(observed.values())
    if total < 1:
        raise ValueError("observed table is empty")
    probs = dict(expected)
    if abs(sum(probs.values()) - 1.0) > 1e-9:
        raise ValueError("expected probabilities must sum to 1")
    unknown = set(observed) - set(probs)
    if unknown:
        raise ValueError(f"observed cells missing from the expected table: {sorted(unknown)[:3]}")
    obs, exp = [], []
    pool_o = pool_e = 0.0
    for cell, p in probs.items():
        e = p * total
        o = observed.get(cell, 0)
        if e < min_expected:
            pool_o += o
            pool_e += e
        else:
            obs.append(o)
            exp.append(e)
    if pool_e > 0:
        obs.append(pool_o)
        exp.append(pool_e)
    if len(obs) <= 1:
        return 0.0, 1.0
    obs = np.asarray(obs, dtype=float)
    exp = np.asarray(exp, dtype=float)
    statistic = float(((obs - exp) ** 2 / exp).sum())
    p_value = float(sstats.chi2.sf(statistic, df=len(obs) - 1))
    return statistic, p_value


def chi_square_two_sample(a, b, min_expected=5.0):
    """Two-sample chi-square over shared cells, pooling sparse ones."""
    na, nb = sum(a.values()), sum(b.values())
    if na < 1 or nb < 1:
        raise ValueError("empty sample")
    cells = sorted(set(a) | set(b), key=str)
    rows = []
    pool = [0.0, 0.0]
    for cell in cells:
        oa, ob = a.get(cell, 0), b.get(cell, 0)
        tot = oa + ob
        if min(na, nb) * tot / (na + nb) < min_expected:
            pool[0] += oa
            pool[1] += ob
        else:
            rows.append((oa, ob))
    if pool[0] + pool[1] > 0:
        rows.append(tuple(pool))
    if len(rows) <= 1:
        return 0.0, 1.0
    statistic = 0.0
    for oa, ob in rows:
        tot = oa + ob
        ea = na * tot / (na + nb)
        eb = nb * tot / (na + nb)
        statistic += (oa - ea) ** 2 / ea + (ob - eb) ** 2 / eb
    p_value = float(sstats.chi2.sf(statistic, df=len(rows) - 1))
    return float(statistic), p_value


def ks_two_sample(xs, ys):
    """Two-sample Kolmogorov-Smirnov with the asymptotic p-value."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("empty sample")
    res = sstats.ks_2samp(xs, ys, method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_uniform(xs):
    """One-sample KS distance of xs from the uniform law on (0, 1)."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise ValueError("empty sample")
    res = sstats.kstest(xs, "uniform")
    return float(res.statistic), float(res.pvalue)
