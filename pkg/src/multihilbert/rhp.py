"""The 2x2 Riemann-Hilbert problem attached to K, solved through the resolvent.

``Gamma(z; lam) = I - (1 / (lam pi)) ∫_U F(x) g(x)^T / (x - z) dx`` where
``(Id - K / lam) F = f`` column by column, with ``f = [chi_E, chi_J]`` and
``g = [chi_J, -chi_E]``.  By the Plemelj formulae this ``Gamma`` jumps
across U by ``I - (2i / lam) f g^T`` (``+`` is the upper side).

Also here: the conformal chart ``rho(lam)`` of the cut plane onto the strip
``|Re rho| < 1/2``, the monodromy frames and the local parametrices at a
double point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretize import Grid, OperatorMatrix, kernel_vectors
from .errors import (
    CoincidentPoints,
    DegenerateFrame,
    NearSpectrumIllConditioned,
    OnCut,
    PoleOfLambda,
    PoorSeparation,
    TooCloseToContour,
)
from .geometry import Configuration

COND_LIMIT = 1e12
SIGMA3 = np.diag([1.0, -1.0])


# ----------------------------------------------------------------------
# rho chart


@dataclass(frozen=True)
class RhoPoint:
    lam: complex
    rho: complex
    branch_ok: bool


def lambda_of_rho(rho):
    """``lam(rho) = -1 / sin(pi rho)``."""
    rho = complex(rho)
    if abs(rho.imag) < 1e-300 and abs(rho.real - round(rho.real)) < 1e-15:
        raise PoleOfLambda(f"rho = {rho} is an integer")
    return -1.0 / np.sin(np.pi * rho)


def rho_of_lambda(lam) -> RhoPoint:
    """Inverse of :func:`lambda_of_rho` on the strip ``|Re rho| <= 1/2``.

    Of the two roots ``w = (1 -+ sqrt(1 - lam^2)) / lam`` (reciprocals of each
    other) the one with ``arg w`` in ``[0, pi]`` gives ``|Re rho| <= 1/2``; on
    the boundary of the strip the root with ``Im rho >= 0`` is taken.
    """
    lam = complex(lam)
    if abs(lam.imag) <= 1e-14 and abs(lam.real) <= 1.0:
        raise OnCut(f"lambda = {lam} lies on the cut [-1, 1]")
    root = np.sqrt(1 - lam * lam)
    cands = [(1 - root) / lam, (1 + root) / lam]
    rhos = [-0.5 + np.log(w) / (1j * np.pi) for w in cands]
    ok = [abs(r.real) <= 0.5 + 1e-15 for r in rhos]
    if ok[0] and ok[1]:
        rho = rhos[0] if rhos[0].imag >= rhos[1].imag else rhos[1]
    else:
        rho = rhos[0] if ok[0] else rhos[1]
    back = lambda_of_rho(rho)
    return RhoPoint(lam, complex(rho), bool(abs(back - lam) <= 1e-12 * max(1.0, abs(lam))
                                            and abs(rho.real) < 0.5))


@dataclass(frozen=True)
class FrameMatrices:
    C_plus: np.ndarray
    C_minus: np.ndarray
    M0: np.ndarray


def frames(rho) -> FrameMatrices:
    """Eigenframes ``C_+``, ``C_-`` of the monodromy ``M0`` at a double point."""
    rho = complex(rho)
    if abs(np.cos(np.pi * rho)) < 1e-14:
        raise DegenerateFrame(f"rho = {rho} is a half-integer; det C_+ vanishes")
    e = np.exp(1j * np.pi * rho)
    Cp = np.array([[1, -1 / e], [1, e]])
    Cm = np.array([[1, -e], [1, 1 / e]])
    s = np.sin(np.pi * rho)  # 2i/lam = -2i s, 4/lam^2 = 4 s^2; finite at rho = 0
    M0 = np.array([[1 - 4 * s * s, -2j * s], [-2j * s, 1]])
    return FrameMatrices(Cp, Cm, M0)


def _zpow_sigma3(z, rho):
    zr = np.exp(rho * np.log(z))
    return np.diag([zr, 1 / zr])


def parametrix_P(z, rho):
    """``z^(rho sigma3) C_+-(rho)`` with the principal branch of ``z^rho``;
    ``C_+`` in the upper half plane, ``C_-`` in the lower one."""
    z = complex(z)
    if z == 0:
        raise ValueError("the parametrix is singular at z = 0")
    fr = frames(rho)
    C = fr.C_plus if z.imag > 0 or (z.imag == 0 and z.real < 0) else fr.C_minus
    return _zpow_sigma3(z, rho) @ C


def q_k(z, rho, k: int):
    """Local parametrix near ``rho = 1/2 + k`` (double point at the origin,
    E to its right)."""
    z = complex(z)
    fr = frames(rho)
    C = fr.C_plus if z.imag > 0 else fr.C_minus
    c2 = 2 * np.cos(np.pi * complex(rho))
    if k < 0:
        D = np.diag([1, 1 / c2])
        L = np.array([[1, 0], [-z ** (2 * abs(k) - 1), 1]])
    else:
        D = np.diag([1 / c2, 1])
        L = np.array([[1, -z ** (2 * k + 1)], [0, 1]])
    return D @ L @ _zpow_sigma3(z, rho) @ C


def q_k_limit(z, k: int):
    """``lim_{eps -> 0} Q_k(z; 1/2 + k + eps)`` for ``Im z > 0``."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("the closed form is stated for the upper half plane")
    lz = np.log(z)
    sg = (-1) ** k
    if k < 0:
        a = 0.5 - abs(k)
        return np.array([[z ** a, sg * 1j * z ** a],
                         [sg * z ** -a * lz / np.pi, z ** -a + 1j / np.pi * z ** -a * lz]])
    a = 0.5 + k
    return np.array([[-sg * z ** a * lz / np.pi, -z ** a - 1j / np.pi * z ** a * lz],
                     [z ** -a, sg * 1j * z ** -a]])


# ----------------------------------------------------------------------
# resolvent solve


@dataclass
class ResolventSolution:
    """Densities ``F`` on the grid for one ``lam``.

    ``F_tilde = sqrt(w) F`` solves the symmetric system
    ``(I - M / lam) F_tilde = sqrt(w) f``.
    """

    cfg: Configuration
    grid: Grid
    lam: complex
    F: np.ndarray
    F_tilde: np.ndarray
    cond: float
    M: np.ndarray

    def residual(self):
        f = kernel_vectors(self.grid.nodes, self.cfg)[0] * self.grid.sqrt_w[:, None]
        r = self.F_tilde - self.M @ self.F_tilde / self.lam - f
        return float(np.max(np.abs(r)))


def solve_F(cfg: Configuration, grid: Grid, K: OperatorMatrix, lam,
            eigs=None) -> ResolventSolution:
    """Solve ``(Id - K / lam) F = f`` on the weight-symmetrised grid.

    The condition number is exact (K is symmetric); pass the eigenvalues of
    K as ``eigs`` to skip recomputing them in a sweep over ``lam``.
    """
    lam = complex(lam)
    if lam == 0:
        raise NearSpectrumIllConditioned("lambda = 0", lam=lam, cond=np.inf)
    M = K.entries
    mu = np.linalg.eigvalsh(M) if eigs is None else np.asarray(eigs)
    d = np.abs(1 - mu / lam)
    cond = float(np.max(d) / np.min(d)) if np.min(d) > 0 else np.inf
    if cond > COND_LIMIT:
        raise NearSpectrumIllConditioned(
            f"Id - K/lambda is ill-conditioned at lambda = {lam} (cond {cond:.3e})",
            lam=lam, cond=cond)
    s = grid.sqrt_w
    f = kernel_vectors(grid.nodes, cfg)[0]
    A = np.eye(M.shape[0]) - M / lam
    Ft = np.linalg.solve(A, (s[:, None] * f).astype(complex))
    return ResolventSolution(cfg, grid, lam, Ft / s[:, None], Ft, cond, M)


def _interp_F(sol: ResolventSolution, x):
    """Nystrom interpolant ``F(x) = f(x) + (1/lam) sum_j K(x, x_j) w_j F_j`` and
    its derivative at points ``x`` of U.

    K vanishes on pairs from the same set, so a node coinciding with ``x``
    contributes nothing and the interpolant reproduces ``F`` at the nodes.
    """
    g = sol.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fx, _ = kernel_vectors(x, sol.cfg)
    _, gy = kernel_vectors(g.nodes, sol.cfg)
    d = x[:, None] - g.nodes[None, :]
    d[d == 0] = np.inf
    fg = fx @ gy.T
    wF = g.weights[:, None] * sol.F
    F = fx + (fg / (np.pi * d)) @ wF / sol.lam
    dF = (-fg / (np.pi * d * d)) @ wF / sol.lam
    return F, dF


# ----------------------------------------------------------------------
# Gamma


def _part_list(cfg):
    return [(p.lo, p.hi, lab) for p, lab in cfg.subintervals()]


def _g_of_label(lab):
    return np.array([1.0, 0.0]) if lab == "J" else np.array([0.0, -1.0])


class GammaField:
    """``Gamma(z; lam)`` reconstructed from a :class:`ResolventSolution`.

    Near a part of U the Cauchy integral is evaluated with the first two
    Taylor terms of the density subtracted, so the quadrature stays accurate
    arbitrarily close to the interior of U; boundary values use the exact
    Plemelj limit of the subtracted terms.
    """

    def __init__(self, sol: ResolventSolution, near: float = 0.5):
        self.sol = sol
        self.cfg = sol.cfg
        self.grid = sol.grid
        self.lam = sol.lam
        self.near = near
        self.parts = _part_list(self.cfg)
        _, self.g_nodes = kernel_vectors(self.grid.nodes, self.cfg)
        self.ends = np.array(sorted({v for lo, hi, _ in self.parts for v in (lo, hi)}))
        self._guard = self._endpoint_guard()

    def _endpoint_guard(self):
        h = min(hi - lo for lo, hi, _ in self.parts) / 2
        return h * self.grid.grading ** (self.grid.panels - 1)

    def _check(self, z):
        if np.min(np.abs(z - self.ends)) < self._guard:
            raise TooCloseToContour(f"z = {z} is within {self._guard:.2e} of an endpoint")
        if z.imag == 0 and any(lo <= z.real <= hi for lo, hi, _ in self.parts):
            raise TooCloseToContour(f"z = {z} lies on U; use boundary()")

    def _cauchy(self, z, side=0):
        """``∫_U F g^T / (x - z) dx``; ``side`` = +-1 gives the boundary value
        at real ``z`` from above / below."""
        g = self.grid
        x, w = g.nodes, g.weights
        h = self.sol.F[:, :, None] * self.g_nodes[:, None, :]  # (N, 2, 2)
        total = np.zeros((2, 2), dtype=complex)
        for k, (lo, hi, lab) in enumerate(self.parts):
            sel = g.sub_index == k
            xs, ws, hs = x[sel], w[sel], h[sel]
            x0 = z.real
            close = (lo < x0 < hi) and (side != 0 or abs(z.imag) < self.near * (hi - lo))
            if not close:
                total += np.einsum("i,iab->ab", ws / (xs - z), hs)
                continue
            F0, dF0 = _interp_F(self.sol, np.array([x0]))
            gl = _g_of_label(lab)
            h0 = np.outer(F0[0], gl)
            h1 = np.outer(dF0[0], gl)
            rem = hs - h0[None] - (xs - x0)[:, None, None] * h1[None]
            with np.errstate(invalid="ignore", divide="ignore"):
                q = ws / (xs - z)
            q = np.where(xs == x0, 0.0, q)
            total += np.einsum("i,iab->ab", q, rem)
            if side == 0:
                L = np.log(hi - z) - np.log(lo - z)
            else:
                L = np.log((hi - x0) / (x0 - lo)) + side * 1j * np.pi
            total += h0 * L + h1 * ((hi - lo) + (z - x0) * L)
        return total

    def __call__(self, z):
        z = complex(z)
        self._check(z)
        return np.eye(2) - self._cauchy(z) / (self.lam * np.pi)

    def boundary(self, x, side: int):
        """``Gamma_+`` (side=+1) or ``Gamma_-`` (side=-1) at a real point of U."""
        x = float(x)
        if not any(lo < x < hi for lo, hi, _ in self.parts):
            raise TooCloseToContour(f"x = {x} is not an interior point of U")
        return np.eye(2) - self._cauchy(complex(x), side) / (self.lam * np.pi)

    def det(self, z):
        return complex(np.linalg.det(self(z)))


def gamma_from_resolvent(sol: ResolventSolution, z):
    """``Gamma(z; lam)`` at one point ``z`` off U."""
    return GammaField(sol)(z)


def inverse_2x2(G):
    """Adjugate inverse; exact when ``det G = 1``."""
    return np.array([[G[1, 1], -G[0, 1]], [-G[1, 0], G[0, 0]]])


def jump_matrix(label: str, lam):
    """``I - (2i/lam) f g^T`` on a J or E point."""
    lam = complex(lam)
    if label == "J":
        return np.array([[1, 0], [-2j / lam, 1]])
    if label == "E":
        return np.array([[1, 2j / lam], [0, 1]])
    raise ValueError("label must be 'J' or 'E'")


def check_jump(field: GammaField, probes, eps=(1e-3, 1e-4, 1e-5)):
    """Jump residuals ``|Gamma_+ - Gamma_- J|`` at real probe points of U.

    Returns a dict with, per probe, the residual of the exact boundary
    values (``exact``), the residual from ``z = x +- i eps`` extrapolated to
    ``eps -> 0`` (``extrapolated``), and the residual against the jump with
    the opposite off-diagonal sign (``opposite``), which should be O(1).
    """
    eps = np.asarray(sorted(eps, reverse=True), dtype=float)
    out = {"probe": [], "label": [], "exact": [], "extrapolated": [], "opposite": []}
    for x in np.atleast_1d(probes):
        lab = field.cfg.label_of(float(x))
        Jm = jump_matrix(lab, field.lam)
        Jo = jump_matrix(lab, -field.lam)
        Gp, Gm = field.boundary(x, +1), field.boundary(x, -1)
        # linear Richardson on the two smallest eps
        seq_p = [field(complex(x, e)) for e in eps]
        seq_m = [field(complex(x, -e)) for e in eps]
        e1, e2 = eps[-2], eps[-1]
        ext_p = (e1 * seq_p[-1] - e2 * seq_p[-2]) / (e1 - e2)
        ext_m = (e1 * seq_m[-1] - e2 * seq_m[-2]) / (e1 - e2)
        out["probe"].append(float(x))
        out["label"].append(lab)
        out["exact"].append(float(np.max(np.abs(Gp - Gm @ Jm))))
        out["extrapolated"].append(float(np.max(np.abs(ext_p - ext_m @ Jm))))
        out["opposite"].append(float(np.max(np.abs(Gp - Gm @ Jo))))
    return out


def symmetry_residuals(cfg, grid, K, lam, points):
    """Residuals of ``conj Gamma(conj z; conj lam) = Gamma(z; lam)`` and
    ``Gamma(z; -lam) = sigma3 Gamma(z; lam) sigma3``."""
    lam = complex(lam)
    G = GammaField(solve_F(cfg, grid, K, lam))
    Gc = GammaField(solve_F(cfg, grid, K, np.conj(lam)))
    Gn = GammaField(solve_F(cfg, grid, K, -lam))
    r1 = r2 = 0.0
    for z in points:
        a = G(z)
        r1 = max(r1, float(np.max(np.abs(np.conj(Gc(np.conj(z))) - a))))
        r2 = max(r2, float(np.max(np.abs(Gn(z) - SIGMA3 @ a @ SIGMA3))))
    return {"conjugation": r1, "sign": r2}


def infinity_decay(field: GammaField, radii=(1e2, 1e3, 1e4), angles=8):
    """Fit ``max_theta |Gamma(R e^{i theta}) - I| ~ C R^{-p}``; returns ``(C, p)``."""
    th = 2 * np.pi * (np.arange(angles) + 0.5) / angles
    errs = [max(np.max(np.abs(field(R * np.exp(1j * t)) - np.eye(2))) for t in th)
            for R in radii]
    slope, icept = np.polyfit(np.log(radii), np.log(errs), 1)
    return float(np.exp(icept)), float(-slope)


# ----------------------------------------------------------------------
# resolvent kernel


class ResolventKernel:
    """``R(x, y; lam) = F(x)^T G(y) / (lam pi (x - y))`` with
    ``G = Gamma^{-T} g`` from boundary values on one side."""

    def __init__(self, field: GammaField, side: int = +1):
        self.field = field
        self.side = side

    def G(self, y):
        lab = self.field.cfg.label_of(float(y))
        Gb = self.field.boundary(y, self.side)
        return inverse_2x2(Gb).T @ _g_of_label(lab)

    def __call__(self, x, y):
        if x == y:
            raise CoincidentPoints("use diagonal() at x = y")
        F, _ = _interp_F(self.field.sol, np.array([float(x)]))
        return complex(F[0] @ self.G(y) / (self.field.lam * np.pi * (x - y)))

    def diagonal(self, y):
        _, dF = _interp_F(self.field.sol, np.array([float(y)]))
        return complex(dF[0] @ self.G(y) / (self.field.lam * np.pi))


def resolvent_kernel(field: GammaField, x, y, side: int = +1):
    return ResolventKernel(field, side)(x, y)


def resolvent_matrix(field: GammaField, side: int = +1):
    """``sqrt(w_i) R(x_i, x_j) sqrt(w_j)`` on the grid nodes, from Gamma."""
    sol = field.sol
    g = sol.grid
    rk = ResolventKernel(field, side)
    Gy = np.array([rk.G(y) for y in g.nodes])  # (N, 2)
    d = g.nodes[:, None] - g.nodes[None, :]
    np.fill_diagonal(d, 1.0)
    R = (sol.F @ Gy.T) / (sol.lam * np.pi * d)
    _, dF = _interp_F(sol, g.nodes)
    R[np.diag_indices_from(R)] = np.einsum("ia,ia->i", dF, Gy) / (sol.lam * np.pi)
    return g.sqrt_w[:, None] * R * g.sqrt_w[None, :]


def resolvent_checks(field: GammaField):
    """Kernel-sampled resolvent against the linear-algebra resolvent.

    ``inverse_rel`` is the relative Frobenius distance to
    ``(I - M/lam)^{-1} - I``; ``identity`` is ``max|(I + R)(I - M/lam) - I|``.
    """
    sol = field.sol
    n = sol.M.shape[0]
    A = np.eye(n) - sol.M / sol.lam
    exact = np.linalg.inv(A) - np.eye(n)
    R = resolvent_matrix(field)
    return {
        "inverse_rel": float(np.linalg.norm(R - exact) / np.linalg.norm(exact)),
        "identity": float(np.max(np.abs((np.eye(n) + R) @ A - np.eye(n)))),
    }


# ----------------------------------------------------------------------
# residues at discrete eigenvalues


def residue_rank_probe(cfg, grid, K: OperatorMatrix, lam0, z_points, radii=None,
                       n_circle: int = 32):
    """Residue of ``Gamma(z; lam)`` at ``lam0`` stacked over ``z_points``.

    The residue is taken as ``(1 / 2 pi i)`` times the contour integral over
    ``|lam - lam0| = r`` (trapezoid rule).  Returns a dict with the ratio
    ``sigma_2 / sigma_1`` of the stacked ``2 x 2m`` residue matrix, its norm
    and the radii used.
    """
    lam0 = complex(lam0)
    mu = np.linalg.eigvalsh(K.entries)
    dist = np.abs(mu - lam0)
    others = np.sort(dist)[1:] if np.min(dist) < 1e-6 * max(1.0, abs(lam0)) else np.sort(dist)
    gap = float(others[0])
    if radii is None:
        r = min(gap, 1e-2) / 3
        radii = (r, r / 2, r / 4)
    for r in radii:
        if gap < 3 * r:
            raise PoorSeparation(f"nearest other eigenvalue at {gap:.3e} < 3 r = {3 * r:.3e}")
    th = 2 * np.pi * np.arange(n_circle) / n_circle
    ratios, norms = [], []
    for r in radii:
        res = [np.zeros((2, 2), dtype=complex) for _ in z_points]
        for t in th:
            lam = lam0 + r * np.exp(1j * t)
            field = GammaField(solve_F(cfg, grid, K, lam, eigs=mu))
            for i, z in enumerate(z_points):
                # (1/2 pi i) G dlam with dlam = i r e^{it} dt
                res[i] += field(z) * r * np.exp(1j * t) / n_circle
        S = np.hstack(res)
        sv = np.linalg.svd(S, compute_uv=False)
        ratios.append(float(sv[1] / sv[0]) if sv[0] > 0 else 0.0)
        norms.append(float(sv[0]))
    return {"ratio": ratios, "norm": norms, "radii": [float(r) for r in radii],
            "gap": gap}
