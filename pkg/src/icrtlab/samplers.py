"""Seeded samplers for marks, exchangeable bridges, their excursion
transforms, and the truncated stable-jump surrogate.

All samplers take an explicit numpy Generator (see rng.make_generator) and
are deterministic in it.
"""
from __future__ import annotations

import numpy as np

from .paths import (COLLISION_TOL, AmbiguousInfimumError, StepPath,
                    _vervaat_at, infimum_point)
from .theta import ThetaParam, stable_constants

RESAMPLE_CAP = 100


def sample_marks(k, rng, path: StepPath | None = None):
    """k i.i.d. uniform points on (0, 1), sorted.

    When a companion path is given, points colliding with its jump times
    (within COLLISION_TOL) are redrawn.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    u = rng.random(k)
    if path is not None:
        for _ in range(RESAMPLE_CAP):
            i = np.searchsorted(path.times, u)
            near_right = (i < path.times.size) & (np.abs(path.times[np.minimum(i, path.times.size - 1)] - u) <= COLLISION_TOL)
            near_left = (i > 0) & (np.abs(path.times[np.maximum(i - 1, 0)] - u) <= COLLISION_TOL)
            bad = near_right | near_left
            if not bad.any():
                break
            u[bad] = rng.random(int(bad.sum()))
        else:
            raise RuntimeError("mark resampling cap exceeded")
    u.sort()
    return u


def _bridge_from_sizes(sizes_by_label, rng, drift=None):
    """Bridge with the given jump sizes at i.i.d. uniform times.

    Returns (path, order) where order[j] is the label (index into
    sizes_by_label) of the j-th jump in time order.
    """
    n = len(sizes_by_label)
    chi = rng.random(n)
    order = np.argsort(chi, kind="stable")
    times = chi[order]
    sizes = np.asarray(sizes_by_label, dtype=float)[order]
    if drift is None:
        # drift balancing the jumps exactly, so eval(1) == 0 in floats
        drift = -float(np.cumsum(sizes)[-1])
    path = StepPath(1.0, drift, times, sizes, kind="bridge")
    return path, order


def sample_Y_theta(theta: ThetaParam, rng):
    """Bridge with jumps theta_i at i.i.d. uniform times, drift -sum(theta)."""
    if len(theta) == 0:
        raise ValueError("theta has no atoms")
    path, _ = _bridge_from_sizes(theta.atoms, rng)
    return path


def sample_Y_n(p, rng):
    """Bridge with n jumps of sizes p(i) at i.i.d. uniform times, drift -1."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be positive and sum to 1")
    path, _ = _bridge_from_sizes(p, rng, drift=-1.0)
    return path


def _excursion_from(sample_bridge, rng):
    for _ in range(RESAMPLE_CAP):
        y = sample_bridge(rng)
        try:
            rho, _ = infimum_point(y)
            return _vervaat_at(y, rho), rho
        except AmbiguousInfimumError:
            continue
    raise RuntimeError("excursion resampling cap exceeded")


def sample_X_theta(theta: ThetaParam, rng):
    """(excursion, rho): the cyclic shift of sample_Y_theta at its infimum."""
    return _excursion_from(lambda g: sample_Y_theta(theta, g), rng)


def sample_X_n(p, rng):
    """(excursion, rho): the cyclic shift of sample_Y_n at its infimum."""
    return _excursion_from(lambda g: sample_Y_n(p, g), rng)


def sample_stable_jump_surrogate(alpha, delta, rng):
    """Ranked atoms of a Poisson process with intensity c_alpha x^{-1-alpha}
    on [delta, inf).

    The count is Poisson with mean (c_alpha/alpha) * delta^-alpha and sizes
    are drawn by inverse CDF, x = delta * U^{-1/alpha}.  tail_l2 records the
    analytic mean squared mass of the dropped jumps below delta,
    c_alpha * delta^{2-alpha} / (2-alpha).
    """
    if not 1.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (1, 2)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    consts = stable_constants(alpha)
    lam = consts.c_alpha / alpha * delta ** (-alpha)
    n = int(rng.poisson(lam))
    sizes = delta * rng.random(n) ** (-1.0 / alpha)
    sizes[::-1].sort()
    tail_l2 = consts.c_alpha * delta ** (2.0 - alpha) / (2.0 - alpha)
    return ThetaParam(sizes, tail_l2=tail_l2, nominal_alpha=alpha)
