"""Explicit diagonalisation of A and K when J ∪ E is the whole line.

The double points ``b_1 < ... < b_2n`` split the line into ``2n`` charts
``(b_k, b_{k+1})``; odd charts make up J, even charts make up E, and
chart ``2n`` wraps through infinity.  On every chart
``phi = ln|beta_ev / beta_od|`` is a monotone bijection onto the line.
In the variable ``t = phi / 2`` the operator A becomes an orthogonal
matrix field times componentwise convolution with ``1 / (pi cosh t)``.

Chart points are parametrised by a logistic variable ``v`` and stored as
offsets from the nearer chart end, so ``phi`` keeps full relative
accuracy next to the double points where ``x`` itself would round onto
an endpoint.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .errors import (
    AtDoublePoint,
    InsufficientDecay,
    NonPositiveRho,
    NoConvergence,
    NotAscending,
    OddLength,
)

T_SPAN = 30.0
T_POINTS = 2 ** 14
DECAY_GUARD = 1e-10
ROOT_TOL = 1e-13


@dataclass(frozen=True)
class DoublePointSystem:
    """Double points and the two monic polynomials vanishing on them.

    Coefficients are stored highest degree first (``numpy.polyval`` order).
    """

    b: np.ndarray
    beta_od: np.ndarray
    beta_ev: np.ndarray
    n: int

    @property
    def odd_roots(self):
        return self.b[0::2]

    @property
    def even_roots(self):
        return self.b[1::2]

    @property
    def J_charts(self):
        return list(range(1, 2 * self.n, 2))

    @property
    def E_charts(self):
        return list(range(2, 2 * self.n + 1, 2))

    def chart_of(self, x):
        """Chart index (1-based) containing ``x``; raises on a double point."""
        x = float(x)
        if np.isinf(x):
            return 2 * self.n
        if np.any(x == self.b):
            raise AtDoublePoint(f"x = {x} is a double point")
        k = int(np.searchsorted(self.b, x))
        return 2 * self.n if k in (0, 2 * self.n) else k

    def to_dict(self):
        return {"b": self.b.tolist(), "n": self.n,
                "beta_od": self.beta_od.tolist(), "beta_ev": self.beta_ev.tolist()}


def build_system(b) -> DoublePointSystem:
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size == 0 or b.size % 2:
        raise OddLength(f"need an even, non-zero number of double points, got {b.size}")
    if not np.all(np.isfinite(b)) or np.any(np.diff(b) <= 0):
        raise NotAscending("double points must be finite and strictly ascending")
    return DoublePointSystem(b, np.poly(b[0::2]), np.poly(b[1::2]), b.size // 2)


# ----------------------------------------------------------------------
# phi and its charts


def phi(sys: DoublePointSystem, x):
    """``ln|beta_ev(x) / beta_od(x)|``; zero at infinity."""
    x = np.asarray(x, dtype=float)
    if np.any(np.isin(x, sys.b)):
        raise AtDoublePoint("phi is singular at the double points")
    with np.errstate(invalid="ignore", over="ignore"):
        d = np.abs(x[..., None] - sys.b)
        val = np.sum(np.log(d[..., 1::2]) - np.log(d[..., 0::2]), axis=-1)
    val = np.where(np.isinf(x), 0.0, val)
    return val if val.ndim else float(val)


def q_of(sys: DoublePointSystem, x):
    """``Q = beta_ev' beta_od - beta_ev beta_od'``, positive on the whole line."""
    return np.polyval(_q_coeffs(sys), x)


def _q_coeffs(sys):
    # the z^(2n-1) terms cancel exactly; keep degree 2n-2 for the reversed forms
    c = np.polysub(np.polymul(np.polyder(sys.beta_ev), sys.beta_od),
                   np.polymul(sys.beta_ev, np.polyder(sys.beta_od)))
    return np.asarray(c)[-(2 * sys.n - 1):]


def phi_derivative(sys: DoublePointSystem, x):
    x = np.asarray(x, dtype=float)
    return q_of(sys, x) / (np.polyval(sys.beta_od, x) * np.polyval(sys.beta_ev, x))


@dataclass
class ChartPoints:
    """Points of one chart in offset form.

    ``x = anchor + s * offset`` with ``s = +1`` for the left chart end and
    ``-1`` for the right one, and ``rel[:, j] = (anchor - b_j) / offset`` so
    that ``x - b_j = offset * (rel_j + s)`` without cancellation.
    """

    k: int
    v: np.ndarray
    x: np.ndarray
    offset: np.ndarray
    s: np.ndarray
    rel: np.ndarray

    @property
    def at_infinity(self):
        return np.isinf(self.offset)

    def _log_unit_factors(self):
        r = self.rel * self.s[:, None]
        with np.errstate(divide="ignore"):
            return np.where(np.abs(r) < 0.5, np.log1p(np.clip(r, -0.5, 0.5)),
                            np.log(np.abs(1.0 + r)))

    def phi(self):
        g = self._log_unit_factors()
        val = np.sum(g[:, 1::2] - g[:, 0::2], axis=1)
        return np.where(self.at_infinity, 0.0, val)

    def sign_beta_od(self, sys):
        s = np.prod(np.sign(self.rel[:, 0::2] + self.s[:, None]), axis=1)
        return np.where(self.at_infinity, 1.0, s)

    def log_abs_phi_prime(self, sys):
        """``ln|phi'(x)| = ln Q(x) - sum_j ln|x - b_j|``."""
        x = self.x
        qc = _q_coeffs(sys)
        big = ~np.isfinite(x) | (np.abs(x) > 1e6 * (1.0 + np.max(np.abs(sys.b))))
        with np.errstate(divide="ignore", invalid="ignore"):
            log_fac = 2 * sys.n * np.log(self.offset) + np.sum(self._log_unit_factors(), axis=1)
            xs = np.where(big, 1.0, x)
            u = np.where(big & np.isfinite(x), 1.0 / xs, 0.0)
            logq_small = np.log(np.polyval(qc, np.where(big, 0.0, x)))
            # Q(x) = x^{2n-2} Qrev(1/x); offset ~ |x| far out
            logq_big = (qc.size - 1) * np.log(np.abs(np.where(big & np.isfinite(x), x, 1.0))) \
                + np.log(_rev_polyval(qc, u))
            val = np.where(big, logq_big, logq_small) - log_fac
        # phi' ~ (e1 - o1) / x^2 at infinity
        return np.where(self.at_infinity, -np.inf, val)


def _rev_polyval(c, u):
    """``u**deg * p(1/u)`` for coefficients ``c`` (highest first)."""
    return np.polyval(np.asarray(c)[::-1], u)


def _chart_points(sys: DoublePointSystem, k: int, v) -> ChartPoints:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    b = sys.b
    m = 2 * sys.n
    if not 1 <= k <= m:
        raise ValueError(f"chart index must lie in 1..{m}")
    left = v < 0
    side = np.where(left, -1.0, 1.0)
    if k < m:
        lo, hi = b[k - 1], b[k]
        span = hi - lo
        offset = np.where(left, span * expit(v), span * expit(-v))
        anchor = np.where(left, lo, hi)
        x = np.where(left, lo + offset, hi - offset)
    else:
        lo, hi = b[-1], b[0]  # wraps: lo = b_2n, hi = b_1
        span = lo - hi
        with np.errstate(divide="ignore"):
            th = np.tanh(0.5 * v)
            offset = np.where(left, span * expit(v) / -th, span * expit(-v) / th)
            offset = np.where(v == 0, np.inf, np.abs(offset))
        anchor = np.where(left, lo, hi)
        x = np.where(left, lo + offset, hi - offset)
        x = np.where(v == 0, np.inf, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = (anchor[:, None] - b[None, :]) / offset[:, None]
    rel = np.where(np.isinf(offset)[:, None], 0.0, rel)
    return ChartPoints(k, v, x, offset, -side, rel)


def _chart_direction(k):
    return -1.0 if k % 2 else 1.0


def _solve_v(sys, k, target, max_bracket=700.0):
    target = np.atleast_1d(np.asarray(target, dtype=float))
    sgn = _chart_direction(k)
    B = np.minimum(np.abs(target) + 60.0, max_bracket)
    lo, hi = -B.copy(), B.copy()
    flo = sgn * (_chart_points(sys, k, lo).phi() - target)
    fhi = sgn * (_chart_points(sys, k, hi).phi() - target)
    for _ in range(8):
        bad = (flo > 0) | (fhi < 0)
        if not bad.any():
            break
        lo = np.where(flo > 0, np.maximum(2 * lo, -max_bracket), lo)
        hi = np.where(fhi < 0, np.minimum(2 * hi, max_bracket), hi)
        flo = sgn * (_chart_points(sys, k, lo).phi() - target)
        fhi = sgn * (_chart_points(sys, k, hi).phi() - target)
    bad = (flo > 0) | (fhi < 0)
    if bad.any():
        i = int(np.argmax(bad))
        raise NoConvergence(f"chart {k}: no bracket for phi = {target[i]}",
                            bracket=(float(lo[i]), float(hi[i])))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        active = (mid != lo) & (mid != hi)
        if not active.any():
            break
        fm = sgn * (_chart_points(sys, k, mid).phi() - target)
        up = fm < 0
        lo = np.where(active & up, mid, lo)
        hi = np.where(active & ~up, mid, hi)
    flo = np.abs(_chart_points(sys, k, lo).phi() - target)
    fhi = np.abs(_chart_points(sys, k, hi).phi() - target)
    v = np.where(flo <= fhi, lo, hi)
    if k == 2 * sys.n:
        v = np.where(target == 0, 0.0, v)
    resid = np.minimum(flo, fhi)
    tol = ROOT_TOL * np.maximum(1.0, np.abs(target))
    if np.any(resid > tol):
        i = int(np.argmax(resid - tol))
        raise NoConvergence(f"chart {k}: residual {resid[i]:.2e} at phi = {target[i]}",
                            bracket=(float(lo[i]), float(hi[i])))
    return v


def chart_points_at(sys: DoublePointSystem, k: int, target) -> ChartPoints:
    """Points of chart ``k`` where ``phi`` equals ``target`` (array)."""
    return _chart_points(sys, k, _solve_v(sys, k, target))


def phi_inverse(sys: DoublePointSystem, k: int, target):
    """The unique ``x`` in chart ``k`` with ``phi(x) = target``.

    Chart ``2n`` returns ``inf`` for ``target = 0``.
    """
    pts = chart_points_at(sys, k, target)
    return pts.x if np.ndim(target) else float(pts.x[0])


# ----------------------------------------------------------------------
# Bezout matrix


@dataclass(frozen=True)
class BezoutData:
    """``B = P diag(rho) P^T``; column ``j`` of ``P`` holds the coefficients
    of ``P_j`` in the basis ``1, z, ..., z^{n-1}``."""

    B: np.ndarray
    rho: np.ndarray
    P: np.ndarray

    def poly(self, j, x):
        return np.polynomial.polynomial.polyval(x, self.P[:, j])

    def reconstruct(self, z, x):
        """``sum_j rho_j P_j(z) P_j(x)``."""
        V = np.vander(np.atleast_1d(z), self.B.shape[0], increasing=True) @ self.P
        W = np.vander(np.atleast_1d(x), self.B.shape[0], increasing=True) @ self.P
        return np.sum(V * W * self.rho, axis=1)

    def bilinear(self, z, x):
        """``sum_{m,n} B_mn z^m x^n``."""
        V = np.vander(np.atleast_1d(z), self.B.shape[0], increasing=True)
        W = np.vander(np.atleast_1d(x), self.B.shape[0], increasing=True)
        return np.einsum("im,mn,in->i", V, self.B, W)


def bezout_matrix(sys: DoublePointSystem) -> BezoutData:
    """Bezout matrix of ``beta_ev`` and ``beta_od`` and its eigenpairs.

    ``beta_ev(z) beta_od(x) - beta_ev(x) beta_od(z) = (z - x) sum B_mn z^m x^n``.
    """
    n = sys.n
    e = sys.beta_ev[::-1]  # ascending coefficients
    o = sys.beta_od[::-1]
    C = np.outer(e, o) - np.outer(o, e)  # C[a, b] = e_a o_b - e_b o_a
    B = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            B[i, j] = sum(C[i + 1 + k, j - k] for k in range(min(j, n - 1 - i) + 1))
    B = 0.5 * (B + B.T)
    rho, P = np.linalg.eigh(B)
    if np.any(rho <= 0):
        raise NonPositiveRho(f"Bezout eigenvalues {rho} are not all positive")
    flip = np.sign(P[np.argmax(np.abs(P), axis=0), np.arange(n)])
    return BezoutData(B, rho, P * flip)


def _p_over_sqrt_q(sys, bez, x):
    """``P_j(x) / sqrt(Q(x))`` for every j, finite at infinity."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = sys.n
    qc = _q_coeffs(sys)
    big = ~np.isfinite(x) | (np.abs(x) > 1e6 * (1.0 + np.max(np.abs(sys.b))))
    out = np.empty((x.size, n))
    xs = np.where(big, 0.0, x)
    V = np.vander(xs, n, increasing=True) @ bez.P
    out[:] = V / np.sqrt(np.polyval(qc, xs))[:, None]
    if big.any():
        u = np.where(np.isfinite(x[big]), 1.0 / np.where(np.isfinite(x[big]), x[big], 1.0), 0.0)
        # reversed forms: P(x) = x^{n-1} Prev(u), Q(x) = x^{2n-2} Qrev(u)
        prev = np.vander(u, n, increasing=False) @ bez.P
        qrev = _rev_polyval(qc, u)
        sgn = np.where(np.isfinite(x[big]), np.sign(x[big]), 1.0) ** (n - 1)
        out[big] = sgn[:, None] * prev / np.sqrt(qrev)[:, None]
    return out


def m_field(sys: DoublePointSystem, bez: BezoutData, side: str, t):
    """Orthogonal matrix field ``M_jk(t) = P_j(x_k) sqrt(rho_j / Q(x_k))``.

    ``x_k`` is the point of the k-th J chart (``side="in"``) or E chart
    (``side="ex"``) where ``phi = 2t``.  Returns shape ``(len(t), n, n)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    charts = _charts(sys, side)
    M = np.empty((t.size, sys.n, sys.n))
    for col, k in enumerate(charts):
        pts = chart_points_at(sys, k, 2 * t)
        M[:, :, col] = _p_over_sqrt_q(sys, bez, pts.x) * np.sqrt(bez.rho)
    return M


def _charts(sys, side):
    if side == "in":
        return sys.J_charts
    if side == "ex":
        return sys.E_charts
    raise ValueError("side must be 'in' or 'ex'")


def orthogonality_residual(M):
    """``max |M^T M - I|`` over a stack of matrices."""
    n = M.shape[-1]
    return float(np.max(np.abs(np.einsum("tji,tjk->tik", M, M) - np.eye(n))))


# ----------------------------------------------------------------------
# isometries onto L^2_n(R)


def t_grid(span: float = T_SPAN, points: int = T_POINTS):
    """Uniform grid on ``[-span, span]`` shifted by half a step, so that
    ``t = 0`` (the point at infinity on the last chart) is never a node."""
    h = 2 * span / points
    return -span + h * (np.arange(points) + 0.5)


def _transform(sys, side, f, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((sys.n, t.size))
    for i, k in enumerate(_charts(sys, side)):
        pts = chart_points_at(sys, k, 2 * t)
        fx = np.asarray(f(pts.x), dtype=float) * np.ones(t.size)
        w = np.exp(-0.5 * pts.log_abs_phi_prime(sys))
        out[i] = np.sqrt(2.0) * pts.sign_beta_od(sys) * fx * w
    return out


def _transform_inv(sys, side, comps: Callable, x):
    """Invert the chart transform at points ``x``; ``comps(k_index, t)``
    evaluates component ``k_index`` at ``t``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    charts = _charts(sys, side)
    out = np.zeros(x.size)
    ks = np.array([sys.chart_of(xi) for xi in x])
    for i, k in enumerate(charts):
        sel = ks == k
        if not sel.any():
            continue
        xs = x[sel]
        pts = chart_points_at(sys, k, phi(sys, xs))
        pts.x = xs
        w = np.exp(0.5 * pts.log_abs_phi_prime(sys))
        out[sel] = comps(i, 0.5 * phi(sys, xs)) * w / (np.sqrt(2.0) * pts.sign_beta_od(sys))
    bad = ~np.isin(ks, charts)
    if bad.any():
        raise ValueError(f"points {x[bad][:3]} do not lie on the {side} side")
    return out


def t_in(sys: DoublePointSystem, f: Callable, t):
    """``(T_in f)_k(t) = sqrt(2) sgn(beta_od(x)) f(x) / sqrt|phi'(x)|`` at
    ``x = phi_k^{-1}(2t)`` on the J charts.  Shape ``(n, len(t))``."""
    return _transform(sys, "in", f, t)


def t_ex(sys: DoublePointSystem, f: Callable, t):
    """Same as :func:`t_in` on the E charts."""
    return _transform(sys, "ex", f, t)


def _interp_components(t, values):
    splines = [CubicSpline(t, row) for row in np.atleast_2d(values)]
    return lambda i, s: splines[i](s)


def t_in_inv(sys: DoublePointSystem, t, values, x):
    """Function on J from its samples ``values`` (n, len(t)), evaluated at ``x``."""
    return _transform_inv(sys, "in", _interp_components(t, values), x)


def t_ex_inv(sys: DoublePointSystem, t, values, x):
    return _transform_inv(sys, "ex", _interp_components(t, values), x)


# ----------------------------------------------------------------------
# convolution with 1 / (pi cosh t)


def sech_multiplier(xi):
    """Fourier multiplier of convolution with ``1 / (pi cosh t)``."""
    a = 0.5 * np.pi * np.abs(np.asarray(xi, dtype=float))
    e = np.exp(-a)
    return 2 * e / (1 + e * e)


def sech_convolve(values, h: float, guard: float = DECAY_GUARD, sign=None):
    """Componentwise convolution with ``1 / (pi cosh t)`` on a uniform grid.

    ``values`` has shape ``(n, N)`` (or ``(N,)``) with spacing ``h``.  The
    signal is zero-padded to twice its length, so nothing wraps around.
    ``sign`` optionally multiplies each row's multiplier by +1 or -1.
    """
    v = np.asarray(values, dtype=float)
    one_d = v.ndim == 1
    v = np.atleast_2d(v)
    N = v.shape[1]
    scale = max(np.max(np.abs(v)), np.finfo(float).tiny)
    edge = max(np.max(np.abs(v[:, :4])), np.max(np.abs(v[:, -4:])))
    if edge > guard * scale:
        raise InsufficientDecay(
            f"signal at the window edge is {edge / scale:.2e} of its peak (guard {guard:g})")
    L = 2 * N
    xi = 2 * np.pi * np.fft.rfftfreq(L, d=h)
    mult = sech_multiplier(xi)[None, :]
    if sign is not None:
        mult = mult * np.asarray(sign, dtype=float)[:, None]
    out = np.fft.irfft(np.fft.rfft(v, n=L, axis=1) * mult, n=L, axis=1)[:, :N]
    return out[0] if one_d else out


# ----------------------------------------------------------------------
# assembled operators


def _m_times(M, vec):
    """``(M(t) @ vec(t))`` for a field ``(T, n, n)`` and samples ``(n, T)``."""
    return np.einsum("tjk,kt->jt", M, vec)


def _m_t_times_at(sys, bez, side, convolved_splines, points):
    """``M(s)^T w(s)`` at ``s = phi(points)/2``, returned as a callable for
    the inverse transform."""
    def comps(i, s):
        M = m_field(sys, bez, side, s)
        w = np.stack([sp(s) for sp in convolved_splines])
        return np.einsum("tji,jt->t", M[:, :, [i]], w)
    return comps


class DiagonalForm:
    """Precomputed matrix fields on a t-grid for repeated applications."""

    def __init__(self, sys: DoublePointSystem, span: float = T_SPAN, points: int = T_POINTS):
        self.sys = sys
        self.bez = bezout_matrix(sys)
        self.t = t_grid(span, points)
        self.h = self.t[1] - self.t[0]
        self.M_in = m_field(sys, self.bez, "in", self.t)
        self.M_ex = m_field(sys, self.bez, "ex", self.t)

    def _splines(self, rows):
        return [CubicSpline(self.t, r) for r in rows]

    def apply_A(self, f: Callable, z):
        """``A f`` at points ``z`` of E, through the diagonal form."""
        fin = _m_times(self.M_in, t_in(self.sys, f, self.t))
        conv = sech_convolve(fin, self.h)
        comps = _m_t_times_at(self.sys, self.bez, "ex", self._splines(conv), z)
        return _transform_inv(self.sys, "ex", comps, z)

    def apply_A_adjoint(self, g: Callable, w):
        """``A^T g`` at points ``w`` of J."""
        gex = _m_times(self.M_ex, t_ex(self.sys, g, self.t))
        conv = sech_convolve(gex, self.h)
        comps = _m_t_times_at(self.sys, self.bez, "in", self._splines(conv), w)
        return _transform_inv(self.sys, "in", comps, w)

    def apply_K(self, u: Callable, v: Callable, z, w):
        """``K (u, v) = (A v, A^T u)`` via ``U^{-1} V^{-1} diag(+-sech) V U``.

        ``u`` lives on E and is returned at ``z``; ``v`` lives on J and is
        returned at ``w``.
        """
        n = self.sys.n
        uhat = _m_times(self.M_ex, t_ex(self.sys, u, self.t))
        vhat = _m_times(self.M_in, t_in(self.sys, v, self.t))
        Vm = v_matrix(n)
        W = Vm @ np.vstack([uhat, vhat])
        W = sech_convolve(W, self.h, sign=np.r_[np.ones(n), -np.ones(n)])
        W = Vm @ W
        top, bottom = W[:n], W[n:]
        Av = _transform_inv(self.sys, "ex",
                            _m_t_times_at(self.sys, self.bez, "ex", self._splines(top), z), z)
        Atu = _transform_inv(self.sys, "in",
                             _m_t_times_at(self.sys, self.bez, "in", self._splines(bottom), w), w)
        return Av, Atu


def v_matrix(n: int):
    """``(1/sqrt 2) [[I, I], [I, -I]]``: symmetric and its own inverse."""
    I = np.eye(n)
    return np.block([[I, I], [I, -I]]) / np.sqrt(2.0)


def apply_A_diag(sys: DoublePointSystem, f: Callable, z, span=T_SPAN, points=T_POINTS):
    """``A f`` at points of E as ``T_ex^{-1} M_ex^T K M_in T_in f``."""
    return DiagonalForm(sys, span, points).apply_A(f, z)


def apply_A_adjoint_diag(sys: DoublePointSystem, g: Callable, w, span=T_SPAN, points=T_POINTS):
    return DiagonalForm(sys, span, points).apply_A_adjoint(g, w)


def k_factorized_apply(sys: DoublePointSystem, u: Callable, v: Callable, z, w,
                       span=T_SPAN, points=T_POINTS):
    return DiagonalForm(sys, span, points).apply_K(u, v, z, w)


# ----------------------------------------------------------------------
# reference quadrature and identities


def quadrature_apply_A(sys: DoublePointSystem, f: Callable, z):
    """``(1/pi) sum over J parts of ∫ f(y) / (z - y) dy`` by adaptive quadrature."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros(z.size)
    for i, zi in enumerate(z):
        for a, c in zip(sys.b[0::2], sys.b[1::2]):
            val, _ = integrate.quad(lambda y: f(y) / (zi - y), a, c,
                                    epsabs=1e-14, epsrel=1e-12, limit=200)
            out[i] += val / np.pi
    return out


def quadrature_apply_A_adjoint(sys: DoublePointSystem, g: Callable, w):
    """``(1/pi) ∫_E g(x) / (x - w) dx`` by adaptive quadrature."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    b = sys.b
    pieces = [(b[k], b[k + 1]) for k in range(1, 2 * sys.n - 1, 2)]
    pieces += [(-np.inf, b[0]), (b[-1], np.inf)]
    out = np.zeros(w.size)
    for i, wi in enumerate(w):
        for a, c in pieces:
            val, _ = integrate.quad(lambda x: g(x) / (x - wi), a, c,
                                    epsabs=1e-14, epsrel=1e-12, limit=200)
            out[i] += val / np.pi
    return out


def _psi(sys, x, on_J):
    """Standard-branch ``ln beta(x)`` on the real line: imaginary part pi on J."""
    return phi(sys, x) + (1j * np.pi if on_J else 0.0)


def _d_full(sys, z, x):
    sz = np.sign(np.polyval(sys.beta_od, z))
    sx = np.sign(np.polyval(sys.beta_od, x))
    return 1j * sz * sx * np.sqrt(np.prod(np.abs(x - sys.b) * np.abs(z - sys.b)))


def identity_residuals(sys: DoublePointSystem, bez: BezoutData, z, x):
    """Residuals of the three chart identities at pairs ``z`` in E, ``x`` in J.

    Returns a dict with keys ``cosh_sinh``, ``sinh_bezout`` and ``kernel``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r1 = r2 = r3 = 0.0
    for zi, xi in zip(z, x):
        s, t = phi(sys, zi) / 2, phi(sys, xi) / 2
        dpsi = _psi(sys, zi, False) - _psi(sys, xi, True)
        lhs1 = np.cosh(s - t)
        rhs1 = 1j * np.sinh(dpsi / 2)
        r1 = max(r1, abs(lhs1 - rhs1) / abs(lhs1))

        D = _d_full(sys, zi, xi)
        lhs2 = 2 * np.sinh(dpsi / 2) * D
        rhs2 = (zi - xi) * bez.reconstruct(zi, xi)[0]
        r2 = max(r2, abs(lhs2 - rhs2) / max(1.0, abs(rhs2)))

        sx = np.sign(np.polyval(sys.beta_od, xi))
        sz = np.sign(np.polyval(sys.beta_od, zi))
        lhs3 = sx * sz / (np.sqrt(abs(phi_derivative(sys, xi)) * phi_derivative(sys, zi)) * (zi - xi))
        rhs3 = bez.reconstruct(xi, zi)[0] / (2 * np.cosh(s - t) * np.sqrt(q_of(sys, xi) * q_of(sys, zi)))
        r3 = max(r3, abs(lhs3 - rhs3) / max(1.0, abs(rhs3)))
    return {"cosh_sinh": float(r1), "sinh_bezout": float(r2), "kernel": float(r3)}


def random_chart_points(sys: DoublePointSystem, side: str, count: int, rng, spread=3.0):
    """Random points spread over the charts of one side (via random phi values)."""
    charts = _charts(sys, side)
    ks = rng.choice(charts, size=count)
    targets = rng.normal(scale=spread, size=count)
    out = np.empty(count)
    for k in charts:
        sel = ks == k
        if sel.any():
            out[sel] = chart_points_at(sys, int(k), targets[sel]).x
    return out
