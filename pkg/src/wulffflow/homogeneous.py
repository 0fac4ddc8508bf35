"""Positively 1-homogeneous functions on R^{d} and their dual norms.

Both anisotropies and convex bodies are described here by a 1-homogeneous
function with derivatives up to third order: the support function of the
Wulff shape, the support function of a body, or a body's gauge.
"""

from __future__ import annotations

from itertools import combinations_with_replacement, permutations

import numpy as np
import sympy as sp

from .errors import DomainError, NumericalError

_CACHE: dict = {}


def fibonacci_sphere(count: int, dim: int = 3, seed: int = 0) -> np.ndarray:
    """Nearly uniform unit vectors: a Fibonacci lattice on S^2, seeded
    Gaussian directions otherwise."""
    if dim == 3:
        i = np.arange(count) + 0.5
        golden = (1 + 5 ** 0.5) / 2
        z = 1 - 2 * i / count
        r = np.sqrt(np.clip(1 - z * z, 0, None))
        ang = 2 * np.pi * i / golden
        return np.stack([z, r * np.cos(ang), r * np.sin(ang)], axis=-1)
    pts = np.random.default_rng(seed).standard_normal((count, dim))
    return pts / np.linalg.norm(pts, axis=-1, keepdims=True)


class HomogeneousFunction:
    """Interface: ``value``, ``grad``, ``hess`` and ``third`` vectorized over
    leading axes, evaluated on the extension to ``R^d \\ {0}``."""

    dim: int

    def value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def third(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dual(self, z: np.ndarray) -> np.ndarray:
        return dual_norm(self, z)


class QuadraticNorm(HomogeneousFunction):
    """``f(x) = sqrt(x^T M x) + <c, x>`` for symmetric positive definite ``M``.

    This is the support function of the ellipsoid ``{y : (y-c)^T M^{-1} (y-c) <= 1}``.
    """

    def __init__(self, matrix, shift=None):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("matrix must be square")
        if not np.allclose(m, m.T) or np.linalg.eigvalsh(m).min() <= 0:
            raise DomainError("matrix must be symmetric positive definite")
        self.dim = m.shape[0]
        self.matrix = m
        self.inverse = np.linalg.inv(m)
        self.shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        if self.shift @ self.inverse @ self.shift >= 1.0:
            raise DomainError("the origin must lie inside the ellipsoid")

    def _norm(self, x):
        mx = x @ self.matrix
        return np.sqrt(np.einsum("...i,...i->...", x, mx)), mx

    def value(self, x):
        x = np.asarray(x, dtype=float)
        q, _ = self._norm(x)
        return q + x @ self.shift

    def _parts(self, x):
        q, mx = self._norm(x)
        g = mx / q[..., None]
        h = (self.matrix - g[..., :, None] * g[..., None, :]) / q[..., None, None]
        return q, g, h

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        _, g, _ = self._parts(x)
        return g + self.shift

    def hess(self, x):
        return self._parts(np.asarray(x, dtype=float))[2]

    def third(self, x):
        q, g, h = self._parts(np.asarray(x, dtype=float))
        t = (np.einsum("...ij,...k->...ijk", h, g) + np.einsum("...ik,...j->...ijk", h, g)
             + np.einsum("...jk,...i->...ijk", h, g))
        return -t / q[..., None, None, None]

    def dual(self, z):
        z = np.asarray(z, dtype=float)
        az = z @ self.inverse
        q = np.einsum("...i,...i->...", z, az)
        b = az @ self.shift
        a = 1.0 - self.shift @ self.inverse @ self.shift
        return (-b + np.sqrt(b * b + a * q)) / a


class SymbolicFunction(HomogeneousFunction):
    """A 1-homogeneous function given by a sympy expression.

    Derivatives up to third order are generated symbolically and compiled with
    common-subexpression elimination.  Compiled callables are cached per
    expression so repeated constructions stay cheap.
    """

    def __init__(self, expr: sp.Expr, symbols):
        self.expr = expr
        self.symbols = tuple(symbols)
        self.dim = len(self.symbols)
        key = (sp.srepr(expr), self.symbols)
        if key not in _CACHE:
            _CACHE[key] = self._compile()
        self._f, self._g, self._h, self._t, self._hidx, self._tidx = _CACHE[key]

    def _compile(self):
        xs, d = self.symbols, self.dim
        grads = [sp.diff(self.expr, v) for v in xs]
        hidx = list(combinations_with_replacement(range(d), 2))
        hs = [sp.diff(grads[i], xs[j]) for i, j in hidx]
        hmap = dict(zip(hidx, hs))
        tidx = list(combinations_with_replacement(range(d), 3))
        ts = [sp.diff(hmap[(i, j)], xs[k]) for i, j, k in tidx]
        lam = lambda exprs: sp.lambdify(xs, exprs, modules="numpy", cse=True)  # noqa: E731
        return lam(self.expr), lam(grads), lam(hs), lam(ts), hidx, tidx

    @staticmethod
    def _stack(values, shape):
        return np.stack([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in values],
                        axis=-1)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self._f(*np.moveaxis(x, -1, 0)), dtype=float),
                               x.shape[:-1]).copy()

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return self._stack(self._g(*np.moveaxis(x, -1, 0)), x.shape[:-1])

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        comps = self._stack(self._h(*np.moveaxis(x, -1, 0)), x.shape[:-1])
        out = np.empty(x.shape[:-1] + (self.dim, self.dim))
        for c, (i, j) in enumerate(self._hidx):
            out[..., i, j] = out[..., j, i] = comps[..., c]
        return out

    def third(self, x):
        x = np.asarray(x, dtype=float)
        comps = self._stack(self._t(*np.moveaxis(x, -1, 0)), x.shape[:-1])
        d = self.dim
        out = np.empty(x.shape[:-1] + (d, d, d))
        for c, idx in enumerate(self._tidx):
            for i, j, k in set(permutations(idx)):
                out[..., i, j, k] = comps[..., c]
        return out


_C1 = np.array([1 / 12, -2 / 3, 2 / 3, -1 / 12])
_OFF = np.array([-2.0, -1.0, 1.0, 2.0])


class FiniteDifferenceFunction(HomogeneousFunction):
    """Derivatives of ``base.value`` by nested fourth-order central differences.

    The innermost step is ``h``; each further derivative level uses a step ten
    times larger, which balances truncation against cancellation error.
    """

    def __init__(self, base: HomogeneousFunction, h: float = 1e-4):
        self.base = base
        self.dim = base.dim
        self.h = float(h)

    def value(self, x):
        return self.base.value(x)

    def _diff(self, fn, x, h):
        x = np.asarray(x, dtype=float)
        cols = []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            acc = sum(c * fn(x + o * e) for c, o in zip(_C1, _OFF))
            cols.append(acc / h)
        return np.stack(cols, axis=-1)

    def grad(self, x):
        return self._diff(self.base.value, x, self.h)

    def hess(self, x):
        out = self._diff(self.grad, x, 10 * self.h)
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def third(self, x):
        out = self._diff(self.hess, x, 100 * self.h)
        perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        n = out.ndim
        axes = [tuple(range(n - 3)) + tuple(n - 3 + q for q in p) for p in perms]
        return sum(np.transpose(out, a) for a in axes) / 6.0


def dual_norm(fn: HomogeneousFunction, z, *, n_starts: int = 32, tol: float = 1e-10,
              max_iter: int = 60) -> np.ndarray:
    """``sup_{x != 0} <x, z> / f(x)`` for a convex 1-homogeneous ``f``.

    The best of ``n_starts`` Fibonacci directions (and ``z/|z|``) seeds a
    Newton iteration on the Lagrange system ``Df(x) = lam z, |x| = 1``.
    Nodes where Newton stalls fall back to projected gradient ascent and are
    then polished by Newton again.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != fn.dim:
        raise DomainError(f"expected vectors of dimension {fn.dim}")
    shape = z.shape[:-1]
    zf = z.reshape(-1, fn.dim)
    zn = np.linalg.norm(zf, axis=-1)
    if np.any(zn == 0):
        raise DomainError("dual norm is undefined at z = 0")
    u = zf / zn[:, None]
    starts = fibonacci_sphere(n_starts, fn.dim)
    obj = (u @ starts.T) / fn.value(starts)[None, :]
    best = starts[np.argmax(obj, axis=1)]
    own = 1.0 / fn.value(u)
    use_own = own >= obj.max(axis=1)
    x = np.where(use_own[:, None], u, best)

    x, ok = _newton(fn, u, x, tol, max_iter)
    if not np.all(ok):
        bad = ~ok
        xb = _ascent(fn, u[bad], x[bad])
        xb, okb = _newton(fn, u[bad], xb, tol, max_iter)
        x[bad] = xb
        if not np.all(okb):
            raise NumericalError("dual norm maximization failed to converge")
    val = np.einsum("ij,ij->i", x, u) / fn.value(x) * zn
    return val.reshape(shape)


def _tangent_residual(fn, u, x):
    f = fn.value(x)
    ux = np.einsum("ij,ij->i", u, x)
    g = u / f[:, None] - (ux / f ** 2)[:, None] * fn.grad(x)
    g -= np.einsum("ij,ij->i", g, x)[:, None] * x
    return np.linalg.norm(g, axis=-1) * f


def _newton(fn, u, x, tol, max_iter):
    d = fn.dim
    x = x / np.linalg.norm(x, axis=-1, keepdims=True)
    lam = fn.value(x) / np.einsum("ij,ij->i", x, u)
    ok = np.zeros(len(x), dtype=bool)
    for _ in range(max_iter):
        res = _tangent_residual(fn, u, x)
        ok = res < tol
        if np.all(ok):
            break
        act = ~ok
        xa, ua, la = x[act], u[act], lam[act]
        jac = np.zeros((len(xa), d + 1, d + 1))
        jac[:, :d, :d] = fn.hess(xa)
        jac[:, :d, d] = -ua
        jac[:, d, :d] = xa
        rhs = np.concatenate([fn.grad(xa) - la[:, None] * ua,
                              0.5 * (np.einsum("ij,ij->i", xa, xa) - 1.0)[:, None]], axis=1)
        try:
            step = np.linalg.solve(jac, -rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        xn = xa + step[:, :d]
        xn /= np.linalg.norm(xn, axis=-1, keepdims=True)
        good = np.einsum("ij,ij->i", xn, ua) > 0
        x[act] = np.where(good[:, None], xn, xa)
        lam[act] = np.where(good, la + step[:, d], la)
    return x, _tangent_residual(fn, u, x) < tol


def _ascent(fn, u, x, iters: int = 500):
    """Projected gradient ascent with backtracking on ``<x,u>/f(x)``."""
    x = x / np.linalg.norm(x, axis=-1, keepdims=True)
    step = np.full(len(x), 0.5)

    def objective(y):
        return np.einsum("ij,ij->i", y, u) / fn.value(y)

    cur = objective(x)
    for _ in range(iters):
        f = fn.value(x)
        g = u / f[:, None] - (np.einsum("ij,ij->i", u, x) / f ** 2)[:, None] * fn.grad(x)
        g -= np.einsum("ij,ij->i", g, x)[:, None] * x
        trial = x + step[:, None] * g
        trial /= np.linalg.norm(trial, axis=-1, keepdims=True)
        new = objective(trial)
        better = new > cur
        x = np.where(better[:, None], trial, x)
        cur = np.where(better, new, cur)
        step = np.where(better, step * 1.5, step * 0.5)
    return x
