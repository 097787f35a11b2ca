"""Vectorised bracketed root finding (bisection followed by Newton polish).

Every inverse in the package (curve inverses, level-set extents, the
stochastic rest point) goes through :func:`bracketed_root`.  Brackets are
always available because the functions involved are monotone on the
branches we search.
"""

from __future__ import annotations

import numpy as np


class RootFindingError(ValueError):
    """Raised when a bracket does not enclose a sign change."""


def bracketed_root(func, lo, hi, *, fprime=None, xtol=1e-13, maxiter=200, newton_steps=4):
    """Solve ``func(x) = 0`` for ``x`` in ``[lo, hi]`` elementwise.

    ``func`` must accept and return arrays.  ``lo`` and ``hi`` broadcast
    together; the sign of ``func`` must differ at the two ends (a zero at
    either end is accepted as the root).  Bisection runs until the bracket
    width is below ``xtol``; when ``fprime`` is supplied a few guarded
    Newton steps then polish the midpoint, staying inside the final
    bracket.
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    lo = lo.copy()
    hi = hi.copy()
    lo0, hi0 = lo.copy(), hi.copy()
    flo = np.asarray(func(lo), dtype=float)
    fhi = np.asarray(func(hi), dtype=float)

    at_lo = flo == 0.0
    at_hi = fhi == 0.0
    bad = (np.sign(flo) == np.sign(fhi)) & ~at_lo & ~at_hi
    if np.any(bad) or np.any(np.isnan(flo)) or np.any(np.isnan(fhi)):
        raise RootFindingError(
            f"no sign change on {int(np.count_nonzero(bad))} bracket(s); "
            f"first offending bracket [{lo[bad][:1]}, {hi[bad][:1]}]"
        )
    # orient so that func(lo) < 0 < func(hi)
    flip = flo > 0
    lo[flip], hi[flip] = hi[flip].copy(), lo[flip].copy()

    for _ in range(maxiter):
        width = np.abs(hi - lo)
        if np.all(width <= xtol):
            break
        mid = 0.5 * (lo + hi)
        fmid = np.asarray(func(mid), dtype=float)
        neg = fmid < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)

    a = np.minimum(lo, hi)
    b = np.maximum(lo, hi)
    x = 0.5 * (a + b)
    if fprime is not None:
        fx = np.asarray(func(x), dtype=float)
        for _ in range(newton_steps):
            d = np.asarray(fprime(x), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = x - fx / d
            ok = np.isfinite(cand) & (cand >= a - xtol) & (cand <= b + xtol)
            fc = np.asarray(func(np.where(ok, cand, x)), dtype=float)
            better = ok & (np.abs(fc) <= np.abs(fx))
            x = np.where(better, cand, x)
            fx = np.where(better, fc, fx)

    x = np.where(at_lo, lo0, np.where(at_hi, hi0, x))
    return x if x.ndim else float(x)


def expand_upper(func, lo, *, target_sign=1.0, limit=1.0, max_doublings=200):
    """Find ``hi`` in ``(lo, limit)`` with ``sign(func(hi)) == target_sign``.

    Points approach ``limit`` geometrically (``limit - (limit-lo) 2^-k``)
    when ``limit`` is finite, and grow as ``lo + 2^k`` otherwise.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.array(lo, dtype=float, copy=True)
    done = np.zeros(lo.shape, dtype=bool)
    for k in range(1, max_doublings + 1):
        if np.isfinite(limit):
            cand = limit - (limit - lo) * 2.0 ** (-k)
        else:
            cand = lo + 2.0 ** k
        val = np.asarray(func(cand), dtype=float)
        hit = ~done & (np.sign(val) == target_sign)
        hi = np.where(hit, cand, hi)
        done |= hit
        if np.all(done):
            return hi if hi.ndim else float(hi)
    raise RootFindingError("could not bracket a root before reaching the domain edge")
