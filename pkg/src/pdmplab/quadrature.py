"""Adaptive panel quadrature and derivative-free searches.

The oracle formulas need error-controlled integrals of smooth but
awkward integrands (exponentially clustered mass, near-singular
endpoints), so integration is done with bisected 15-point
Gauss-Legendre panels refined where the panel error estimate is
largest. Root and maximum searches are bracketing only; several of
the target functions are flat near their extrema.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(15)


class QuadratureError(Exception):
    """Requested tolerance not reached; carries the achieved estimate."""

    def __init__(self, message, value, error):
        super().__init__(f"{message} (value={value!r}, error estimate={error!r})")
        self.value = value
        self.error = error


def _panel(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(_WEIGHTS, f(mid + half * _NODES)))


def adaptive_quad(f, a, b, rel_tol=1e-8, abs_tol=0.0, min_depth=0, max_panels=20000):
    """Integrate vectorized f over [a, b]; returns (value, error_estimate).

    Each panel's value is the sum over its two halves and its error
    estimate is the change under that bisection; the worst panel is
    split until the summed estimate meets max(abs_tol, rel_tol*|value|).
    min_depth forces 2**min_depth initial panels, which is the
    refinement-depth knob used by the self-consistency checks.

    Raises QuadratureError if max_panels refinements cannot reach the
    tolerance.
    """
    if not b > a:
        raise ValueError(f"empty integration interval [{a}, {b}]")
    edges = np.linspace(a, b, 2 ** int(min_depth) + 1)
    heap = []
    total = 0.0
    total_err = 0.0
    counter = 0  # heap tiebreaker
    for lo, hi in zip(edges[:-1], edges[1:]):
        coarse = _panel(f, lo, hi)
        mid = 0.5 * (lo + hi)
        fine = _panel(f, lo, mid) + _panel(f, mid, hi)
        err = abs(fine - coarse)
        total += fine
        total_err += err
        heapq.heappush(heap, (-err, counter, lo, hi, fine, err))
        counter += 1
    n_panels = len(heap)
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if n_panels >= max_panels:
            raise QuadratureError("adaptive quadrature did not converge", total, total_err)
        _, _, lo, hi, fine, err = heapq.heappop(heap)
        total -= fine
        total_err -= err
        mid = 0.5 * (lo + hi)
        for clo, chi in ((lo, mid), (mid, hi)):
            coarse = _panel(f, clo, chi)
            cmid = 0.5 * (clo + chi)
            cfine = _panel(f, clo, cmid) + _panel(f, cmid, chi)
            cerr = abs(cfine - coarse)
            total += cfine
            total_err += cerr
            heapq.heappush(heap, (-cerr, counter, clo, chi, cfine, cerr))
            counter += 1
        n_panels += 1
    return total, total_err


def bisect_root(f, a, b, tol=1e-6, max_iter=200):
    """Root of scalar f on a sign-changing bracket [a, b]."""
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError(f"f({a}) and f({b}) have the same sign")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or (b - a) < tol:
            return m
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def golden_max(f, a, b, tol=1e-6, max_iter=500):
    """Maximum of unimodal scalar f on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(max_iter):
        if (b - a) < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)
