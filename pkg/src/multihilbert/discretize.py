"""Graded Gauss-Legendre grids and Nyström matrices for A, A^T and K.

Every bounded part of J and E is split at its midpoint; each half carries
``panels`` Gauss-Legendre panels whose lengths shrink geometrically (ratio
``grading``) toward the endpoint.  No node ever sits on an endpoint, so
the kernel is only evaluated at distinct cross-type pairs.

Matrices are weight-symmetrised, ``M_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j)``,
so the discrete K is exactly symmetric and its eigenvectors orthogonal in
the Euclidean inner product.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .errors import (
    CoincidentPoints,
    ContourTouchesSets,
    EvaluationInsideJ,
    UnboundedWithoutCompactification,
)
from .geometry import Configuration


@dataclass(frozen=True)
class Grid:
    """Composite quadrature on U = J ∪ E.

    ``sub_index[i]`` is the position of node ``i``'s part in
    ``cfg.subintervals()`` and ``panel_index[i]`` its panel (0 at the left
    end of that part).
    """

    cfg: Configuration
    nodes: np.ndarray
    weights: np.ndarray
    is_E: np.ndarray
    sub_index: np.ndarray
    panel_index: np.ndarray
    grading: float
    panels: int
    order: int

    @property
    def is_J(self):
        return ~self.is_E

    @property
    def size(self):
        return self.nodes.size

    @property
    def sqrt_w(self):
        return np.sqrt(self.weights)

    @property
    def J_nodes(self):
        return self.nodes[self.is_J]

    @property
    def E_nodes(self):
        return self.nodes[self.is_E]

    def breakpoints(self, sub):
        """Panel edges of one part, ascending."""
        part = self.cfg.subintervals()[sub][0]
        return _panel_edges(part.lo, part.hi, self.panels, self.grading)


def _panel_edges(a, b, panels, grading):
    h = 0.5 * (b - a)
    dist = np.concatenate([[0.0], h * grading ** np.arange(panels - 1, -1, -1)])
    left = a + dist
    right = b - dist[::-1]
    return np.concatenate([left, right[1:]])


def build_grid(cfg: Configuration, panels: int = 16, grading: float = 0.5,
               order: int = 8) -> Grid:
    """Composite Gauss-Legendre grid graded toward every endpoint.

    ``panels`` counts the graded panels on each half of a part, so the node
    count is ``2 * panels * order`` per part and the smallest panel next to
    an endpoint is ``grading**(panels-1)`` times the half-length.
    """
    if panels < 2:
        raise ValueError("panels must be >= 2")
    if not 0.0 < grading < 1.0:
        raise ValueError("grading must lie in (0, 1)")
    if not cfg.bounded:
        raise UnboundedWithoutCompactification(
            "unbounded parts must be mapped to a bounded configuration first "
            "(see geometry.compactify)")
    xg, wg = leggauss(order)
    X, W, isE, sub, pan = [], [], [], [], []
    for k, (part, lab) in enumerate(cfg.subintervals()):
        edges = _panel_edges(part.lo, part.hi, panels, grading)
        for p, (u, v) in enumerate(zip(edges[:-1], edges[1:])):
            X.append(0.5 * (u + v) + 0.5 * (v - u) * xg)
            W.append(0.5 * (v - u) * wg)
            isE.append(np.full(order, lab == "E"))
            sub.append(np.full(order, k))
            pan.append(np.full(order, p))
    nodes = np.concatenate(X)
    if np.unique(nodes).size != nodes.size:
        raise ValueError("grading too deep for double precision: coincident nodes")
    ends = [v for v, _ in cfg.endpoints if math.isfinite(v)]
    if np.isin(nodes, ends).any():
        raise ValueError("grading too deep for double precision: node on an endpoint")
    return Grid(cfg, nodes, np.concatenate(W), np.concatenate(isE),
                np.concatenate(sub), np.concatenate(pan), grading, panels, order)


# ----------------------------------------------------------------------
# kernel


def kernel_vectors(x, cfg: Configuration):
    """``f(x) = [chi_E, chi_J]`` and ``g(x) = [chi_J, -chi_E]`` as (N, 2) arrays."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    chiE = cfg.E.indicator(x)
    chiJ = cfg.J.indicator(x)
    return np.stack([chiE, chiJ], axis=-1), np.stack([chiJ, -chiE], axis=-1)


def kernel_K(x, y, cfg: Configuration):
    """``[chi_J(y) chi_E(x) - chi_J(x) chi_E(y)] / (pi (x - y))``."""
    if np.any(np.asarray(x) == np.asarray(y)):
        raise CoincidentPoints("kernel evaluated on the diagonal")
    fx, _ = kernel_vectors(x, cfg)
    _, gy = kernel_vectors(y, cfg)
    val = np.sum(fx * gy, axis=-1) / (np.pi * (np.asarray(x) - np.asarray(y)))
    return float(val[0]) if np.ndim(x) == 0 and np.ndim(y) == 0 else val


def _cross_matrix(rows, cols):
    d = rows[:, None] - cols[None, :]
    return 1.0 / (np.pi * d)


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    grid: Grid
    kind: str  # "FullK" or "BlockA"
    symmetrization: str = "weight-symmetrized"

    @property
    def shape(self):
        return self.entries.shape


def assemble_K(cfg: Configuration, grid: Grid) -> OperatorMatrix:
    """Weight-symmetrised Nyström matrix of K on the whole grid."""
    x, s, E = grid.nodes, grid.sqrt_w, grid.is_E
    J = ~E
    M = np.zeros((x.size, x.size))
    A = _cross_matrix(x[E], x[J]) * s[E][:, None] * s[J][None, :]
    M[np.ix_(E, J)] = A
    M[np.ix_(J, E)] = A.T
    return OperatorMatrix(M, grid, "FullK")


def assemble_A(cfg: Configuration, grid: Grid) -> OperatorMatrix:
    """Block A: rows on E-nodes, columns on J-nodes (weight-symmetrised)."""
    x, s, E = grid.nodes, grid.sqrt_w, grid.is_E
    J = ~E
    A = _cross_matrix(x[E], x[J]) * s[E][:, None] * s[J][None, :]
    return OperatorMatrix(A, grid, "BlockA")


def block_A(K: OperatorMatrix) -> OperatorMatrix:
    E = K.grid.is_E
    return OperatorMatrix(K.entries[np.ix_(E, ~E)], K.grid, "BlockA")


def _samples(f, nodes):
    if callable(f):
        return np.asarray(f(nodes), dtype=float)
    f = np.asarray(f)
    if f.shape[0] != nodes.size:
        raise ValueError(f"expected {nodes.size} samples, got {f.shape[0]}")
    return f


def apply_A(cfg: Configuration, grid: Grid, f, x):
    """Quadrature value of ``(1/pi) ∫_J f(y) / (x - y) dy``.

    ``f`` is either a callable or its samples on the J-nodes of ``grid``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(cfg.J.contains(x)):
        raise EvaluationInsideJ("apply_A needs x outside J")
    y, w = grid.J_nodes, grid.weights[grid.is_J]
    fy = _samples(f, y)
    out = (_cross_matrix(np.atleast_1d(x), y) * w) @ fy
    return out if x.ndim else out[0]


def apply_A_adjoint(cfg: Configuration, grid: Grid, g, w):
    """Quadrature value of ``(1/pi) ∫_E g(x) / (x - w) dx`` for w outside E."""
    w = np.asarray(w, dtype=float)
    if np.any(cfg.E.contains(w)):
        raise EvaluationInsideJ("adjoint evaluation needs w outside E")
    x, wt = grid.E_nodes, grid.weights[grid.is_E]
    gx = _samples(g, x)
    out = (-_cross_matrix(np.atleast_1d(w), x) * wt) @ gx
    return out if w.ndim else out[0]


# ----------------------------------------------------------------------
# contour factorisation A = T2 T1


def _check_contour(cfg, grid, ellipses):
    def inside(x):
        x = np.asarray(x, dtype=float)
        hit = np.zeros(x.shape, dtype=bool)
        for c, a, _ in ellipses:
            hit |= np.abs(x - c) < a
        return hit

    for part in cfg.J.parts:
        probe = np.linspace(part.lo, part.hi, 65)
        if not inside(probe).all():
            raise ContourTouchesSets(f"J part {part.as_list()} is not enclosed by the contour")
    for part in cfg.E.parts:
        probe = np.linspace(part.lo, part.hi, 65)
        if inside(probe).any():
            raise ContourTouchesSets(f"E part {part.as_list()} meets the contour interior")
    for c, a, b in ellipses:
        if a <= 0 or b <= 0:
            raise ContourTouchesSets("semi-axes must be positive")


def contour_factorize(cfg: Configuration, grid: Grid, ellipses=((0.5, 0.9, 0.3),),
                      n_points: int = 256):
    """Discretise A as a product of two Hilbert-Schmidt operators.

    ``T1`` maps J-samples to samples on the clockwise ellipses ``gamma``
    (kernel ``1/(pi (w - y))``), ``T2`` maps those to E-samples (kernel
    ``1/(2 pi i (w - x))`` against ``dw``).  Both are weight-symmetrised in
    the ``|dw|`` measure, so ``T2 @ T1`` should reproduce the symmetrised
    BlockA matrix up to trapezoid error.

    Returns ``(T1, T2, residual)`` with ``residual = max|T2 T1 - A|``.
    """
    ellipses = [tuple(map(float, e)) for e in ellipses]
    if cfg.distance() <= 0:
        raise ContourTouchesSets("J and E touch; no separating contour exists")
    _check_contour(cfg, grid, ellipses)

    theta = 2 * np.pi * np.arange(n_points) / n_points
    dtheta = 2 * np.pi / n_points
    w_pts, dw = [], []
    for c, a, b in ellipses:
        w_pts.append(c + a * np.cos(theta) - 1j * b * np.sin(theta))
        dw.append((-a * np.sin(theta) - 1j * b * np.cos(theta)) * dtheta)
    w_pts = np.concatenate(w_pts)
    dw = np.concatenate(dw)
    omega = np.abs(dw)

    y, sJ = grid.J_nodes, grid.sqrt_w[grid.is_J]
    x, sE = grid.E_nodes, grid.sqrt_w[grid.is_E]
    T1 = np.sqrt(omega)[:, None] / (np.pi * (w_pts[:, None] - y[None, :])) * sJ[None, :]
    T2 = (sE[:, None] * dw[None, :] / (2j * np.pi * (w_pts[None, :] - x[:, None]))
          / np.sqrt(omega)[None, :])
    A = assemble_A(cfg, grid).entries
    residual = float(np.max(np.abs(T2 @ T1 - A)))
    return T1, T2, residual


# ----------------------------------------------------------------------
# Hilbert transform on the whole line (quadrature oracle)


def hilbert_transform_line(f: Callable, x, window: float = 1.0):
    """``(H f)(x) = (1/pi) PV ∫ f(y) / (y - x) dy`` by adaptive quadrature.

    With this sign ``A = -Pi_E H Pi_J``.  The principal value is taken on
    ``[x - window, x + window]`` with QUADPACK's Cauchy weight; the tails
    are ordinary improper integrals.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    opts = dict(limit=400, epsabs=1e-14, epsrel=1e-12)
    with warnings.catch_warnings():
        # near-zero PV pieces cannot meet epsrel; epsabs still holds
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for i, x0 in enumerate(xs):
            pv, _ = integrate.quad(lambda y: float(f(y)), x0 - window, x0 + window,
                                   weight="cauchy", wvar=x0, **opts)
            left, _ = integrate.quad(lambda y: float(f(y)) / (y - x0), -np.inf, x0 - window,
                                     **opts)
            right, _ = integrate.quad(lambda y: float(f(y)) / (y - x0), x0 + window, np.inf,
                                      **opts)
            out[i] = (pv + left + right) / np.pi
    return out if np.ndim(x) else float(out[0])


# ----------------------------------------------------------------------
# export


def grid_to_csv(grid: Grid, path):
    labels = np.where(grid.is_E, "E", "J")
    with open(path, "w") as fh:
        fh.write("node,weight,set,subinterval,panel\n")
        for x, w, lab, s, p in zip(grid.nodes, grid.weights, labels,
                                   grid.sub_index, grid.panel_index):
            fh.write(f"{x!r},{w!r},{lab},{s},{p}\n")


def matrix_to_binary(op: OperatorMatrix, stem):
    """Write ``stem.bin`` (row-major float64) and ``stem.json`` header."""
    entries = np.ascontiguousarray(op.entries, dtype="<f8")
    entries.tofile(f"{stem}.bin")
    header = {"rows": entries.shape[0], "cols": entries.shape[1], "kind": op.kind,
              "symmetrization": op.symmetrization, "dtype": "float64", "order": "C"}
    with open(f"{stem}.json", "w") as fh:
        json.dump(header, fh)
    return header


def matrix_from_binary(stem):
    with open(f"{stem}.json") as fh:
        header = json.load(fh)
    data = np.fromfile(f"{stem}.bin", dtype="<f8")
    return data.reshape(header["rows"], header["cols"]), header
