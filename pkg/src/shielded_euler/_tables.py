"""Cumulative-integral lookup tables with exact-derivative Hermite interpolation."""

import numpy as np
from scipy.interpolate import CubicHermiteSpline

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class CumulativeTable:
    """Tabulates ``F(t) = int_0^t f(s) ds`` for a smooth positive ``f``.

    Nodes are 0 followed by a geometric ladder ``t_lo * ratio**k`` up to ``t_hi``;
    each segment is integrated with 8-point Gauss-Legendre and the table is
    interpolated by a cubic Hermite spline using the exact derivative ``f``.
    """

    def __init__(self, f, t_lo, t_hi, ratio=1.02):
        n = int(np.ceil(np.log(t_hi / t_lo) / np.log(ratio))) + 1
        nodes = np.concatenate([[0.0], np.geomspace(t_lo, t_hi, n)])
        a, b = nodes[:-1], nodes[1:]
        s = a[:, None] + (b - a)[:, None] * _GL_X
        seg = (b - a) * np.sum(f(s) * _GL_W, axis=1)
        values = np.concatenate([[0.0], np.cumsum(seg)])
        slopes = f(nodes)
        # f at t = 0 is a removable limit; take it from the first interior node
        slopes[0] = f(np.array([t_lo * 1e-6]))[0]
        self.nodes = nodes
        self.values = values
        self.t_hi = float(t_hi)
        self._spline = CubicHermiteSpline(nodes, values, slopes, extrapolate=False)
        self._f = f

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self._spline(np.minimum(t, self.t_hi))
        beyond = t > self.t_hi
        if np.any(beyond):
            out = np.where(beyond, self.values[-1] + self._tail(np.where(beyond, t, self.t_hi)), out)
        return out

    def _tail(self, t):
        # rare queries past the table end: composite Gauss-Legendre from t_hi
        edges = np.linspace(0.0, 1.0, 65)
        total = np.zeros(np.shape(t))
        for lo, hi in zip(edges[:-1], edges[1:]):
            a = self.t_hi + lo * (t - self.t_hi)
            b = self.t_hi + hi * (t - self.t_hi)
            s = a[..., None] + (b - a)[..., None] * _GL_X
            total = total + (b - a) * np.sum(self._f(s) * _GL_W, axis=-1)
        return total
