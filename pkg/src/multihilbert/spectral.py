"""Singular values, eigenvalues and their diagnostics.

The finite sections only approximate the spectrum of K.  Statements
about the continuous part are therefore made by comparing two grid
refinements (:func:`refinement_counts`), never from a single matrix.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .discretize import OperatorMatrix
from .errors import WindowBelowNoiseFloor

NOISE_FLOOR = 1e-13
PAIRING_TOL = 1e-8


def singular_values(A: OperatorMatrix | np.ndarray) -> np.ndarray:
    """Full singular spectrum of the (weight-symmetrised) A block, descending."""
    M = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def eigenvalues_K(K: OperatorMatrix | np.ndarray):
    """Eigenvalues of the symmetric K matrix (ascending) and the ±pairing.

    Because K is block off-diagonal its spectrum is ``{±sigma_j}`` plus
    zeros, so after sorting ``pair[i] = N - 1 - i``.
    """
    M = K.entries if isinstance(K, OperatorMatrix) else np.asarray(K)
    lam = np.linalg.eigvalsh(M)
    pair = np.arange(lam.size)[::-1].copy()
    return lam, pair


def pairing_residual(lam, pair) -> float:
    if lam.size == 0:
        return 0.0
    return float(np.max(np.abs(lam + lam[pair])))


def decay_fit(svals, j_min: int, j_max: int):
    """Least-squares slope of ``ln sigma_j`` against ``j`` (1-based, inclusive).

    Returns ``(rate, r2)``; a negative rate means exponential decay.
    """
    s = np.asarray(svals, dtype=float)
    if not 1 <= j_min < j_max <= s.size:
        raise ValueError(f"bad window [{j_min}, {j_max}] for {s.size} values")
    if s[j_max - 1] < NOISE_FLOOR:
        raise WindowBelowNoiseFloor(
            f"sigma_{j_max} = {s[j_max - 1]:.3e} is below the noise floor {NOISE_FLOOR:g}")
    j = np.arange(j_min, j_max + 1, dtype=float)
    y = np.log(s[j_min - 1:j_max])
    rate, icept = np.polyfit(j, y, 1)
    resid = y - (rate * j + icept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(rate), float(r2)


def auto_window(svals, j_min: int = 1, floor: float = NOISE_FLOOR * 10):
    """Largest window starting at ``j_min`` whose values stay above ``floor``."""
    s = np.asarray(svals)
    above = np.nonzero(s >= floor)[0]
    return j_min, int(above[-1] + 1) if above.size else j_min


def partial_trace_norms(svals, p_list=(1.0,), step: int = 10):
    """Partial sums of ``sigma_j**p`` at N = step, 2*step, ...

    Each entry holds ``N``, ``sums``, ``increments`` (sum over each block of
    ``step`` terms) and ``last_increment_ratio`` = last increment / total.
    """
    s = np.asarray(svals, dtype=float)
    out = {}
    for p in p_list:
        if not 0 < p <= 1:
            raise ValueError("p must lie in (0, 1]")
        terms = s ** p
        csum = np.cumsum(terms)
        Ns = list(range(step, s.size + 1, step))
        if not Ns or Ns[-1] != s.size:
            Ns.append(s.size)
        Ns = [n for n in Ns if n > 0]
        sums = [float(csum[n - 1]) for n in Ns]
        inc = np.diff([0.0] + sums)
        total = sums[-1] if sums else 0.0
        out[float(p)] = {
            "N": Ns,
            "sums": sums,
            "increments": [float(v) for v in inc],
            "total": total,
            "last_increment_ratio": float(inc[-1] / total) if total > 0 else 0.0,
        }
    return out


def counting_histogram(eigenvalues, bins=10, floor: float = 0.0):
    """Counts of eigenvalues per bin over [-1, 1].

    ``bins`` is a bin count or explicit edges.  Eigenvalues with
    ``|lambda| <= floor`` are dropped first; pass ``NOISE_FLOOR`` to ignore
    numerically-zero eigenvalues, which every finite section has in
    proportion to its size.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[np.abs(lam) > floor]
    if np.ndim(bins) == 0:
        if bins < 2:
            raise ValueError("bins must be >= 2")
        edges = np.linspace(-1.0, 1.0, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.size < 2:
            raise ValueError("need at least two bin edges")
    counts, edges = np.histogram(lam, bins=edges)
    return edges, counts


def band_count(eigenvalues, upper=0.9, floor=NOISE_FLOOR) -> int:
    """Number of eigenvalues with ``floor < |lambda| < upper``."""
    a = np.abs(np.asarray(eigenvalues))
    return int(np.sum((a > floor) & (a < upper)))


def refinement_counts(cfg, panels_pair=(16, 32), upper=0.9, floor=NOISE_FLOOR,
                      grading=0.5, order=8):
    """Band counts at two refinements.

    Returns ``(counts, node_counts)``.  A continuous spectrum in the band
    shows up as counts growing in proportion to the node count, while
    isolated eigenvalues give a count that does not move.
    """
    from .discretize import assemble_K, build_grid

    counts, sizes = [], []
    for p in panels_pair:
        g = build_grid(cfg, panels=p, grading=grading, order=order)
        lam, _ = eigenvalues_K(assemble_K(cfg, g))
        counts.append(band_count(lam, upper, floor))
        sizes.append(g.size)
    return counts, sizes


@dataclass
class SpectralReport:
    singular_values: list
    eigenvalues: list
    decay_rate: float | None
    decay_r2: float | None
    partial_p_sums: dict
    histogram: dict
    pairing_residual: float
    grid: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["partial_p_sums"] = {str(k): v for k, v in self.partial_p_sums.items()}
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def spectral_report(K: OperatorMatrix, p_list=(1.0, 0.5), bins=20) -> SpectralReport:
    from .discretize import block_A

    lam, pair = eigenvalues_K(K)
    sv = singular_values(block_A(K))
    rate = r2 = None
    j0, j1 = auto_window(sv)
    if j1 - j0 >= 2:
        rate, r2 = decay_fit(sv, j0, j1)
    edges, counts = counting_histogram(lam, bins, floor=NOISE_FLOOR)
    g = K.grid
    return SpectralReport(
        singular_values=[float(v) for v in sv],
        eigenvalues=[float(v) for v in lam],
        decay_rate=rate,
        decay_r2=r2,
        partial_p_sums=partial_trace_norms(sv, p_list),
        histogram={"edges": edges.tolist(), "counts": counts.tolist()},
        pairing_residual=pairing_residual(lam, pair),
        grid={"nodes": int(g.size), "panels": g.panels, "order": g.order,
              "grading": g.grading},
    )


def write_column_csv(values, path, header="index,value"):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{float(v)!r}\n")
