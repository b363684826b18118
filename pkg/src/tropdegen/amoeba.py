"""Numerical sampling of amoebas over the punctured disc and convergence
diagnostics against the tropicalization.

A fiber polynomial is sampled by drawing the first n-1 rescaled-log
coordinates uniformly in a window (with uniform phases), solving the
resulting univariate polynomial in the last variable, and pushing every
root through the rescaled log map.  The one-sided Hausdorff distance of the
cloud to the tropical complex is the convergence diagnostic; no rate is
asserted anywhere, the report is just the measured table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .laurent import LaurentPolynomial
from .polyhedral import PolyhedralComplex

RESIDUAL_REL_TOL = 1e-8
_CHUNK = 2048


@dataclass(frozen=True)
class ScaleFactor:
    """Fiber parameter t with its rescaling factor eps = 1/log(1/|t|)."""

    t: complex

    def __post_init__(self):
        r = abs(self.t)
        if not 0 < r < math.exp(-1.0):
            raise ValueError("need 0 < |t| < exp(-1) so that eps lies in (0, 1)")

    @property
    def eps(self) -> float:
        return 1.0 / math.log(1.0 / abs(self.t))


def log_t(x: Sequence[complex], s: ScaleFactor) -> np.ndarray:
    """Componentwise log|x_i| / log|t|; rejects zero coordinates."""
    arr = np.asarray(x, dtype=complex)
    if np.any(arr == 0):
        raise ValueError("log map requires nonzero coordinates")
    return np.log(np.abs(arr)) / math.log(abs(s.t))


@dataclass
class PointCloud:
    """Rescaled-log samples of a fiber hypersurface, with full metadata."""

    points: np.ndarray          # (m, n) float
    solutions: np.ndarray       # (m, n) complex, the underlying roots
    t: complex
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def in_window(self, window: Sequence[tuple[float, float]]) -> np.ndarray:
        lo = np.array([w[0] for w in window])
        hi = np.array([w[1] for w in window])
        mask = np.all((self.points >= lo) & (self.points <= hi), axis=1)
        return self.points[mask]


# ---------------------------------------------------------------------------
# univariate root finding
# ---------------------------------------------------------------------------

def aberth_roots(
    coeffs: np.ndarray, max_iter: int = 200, rel_tol: float = 1e-13
) -> tuple[np.ndarray, bool]:
    """All roots of sum_k coeffs[k] z^k by simultaneous Aberth iteration.

    Returns (roots, converged).  Falls back to companion-matrix eigenvalues
    when the iteration stalls.  Deterministic: the initial configuration is
    a fixed spiral on a radius from the coefficient magnitudes.
    """
    c = np.asarray(coeffs, dtype=complex)
    c = np.trim_zeros(c, "b")
    if len(c) <= 1:
        return np.empty(0, dtype=complex), True
    deg = len(c) - 1
    if deg == 1:
        return np.array([-c[0] / c[1]]), True

    lead = c[-1]
    mags = np.abs(c[:-1] / lead)
    radius = 1.0 + float(np.max(mags)) if np.max(mags) > 0 else 1.0
    k = np.arange(deg)
    z = radius * (1.0 + 0.02 * k / deg) * np.exp(2j * np.pi * (k / deg + 0.25 / deg))

    dc = c[1:] * np.arange(1, deg + 1)
    for _ in range(max_iter):
        p = np.polyval(c[::-1], z)
        dp = np.polyval(dc[::-1], z)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(dp != 0, p / dp, 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            sums = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - newton * sums
            step = np.where(denom != 0, newton / denom, newton)
        z = z - step
        if not np.all(np.isfinite(z)):
            break
        if np.all(np.abs(step) <= rel_tol * np.maximum(np.abs(z), 1e-300)):
            return z, True

    roots = np.roots(c[::-1])
    return roots, bool(np.all(np.isfinite(roots)))


# ---------------------------------------------------------------------------
# hypersurface sampling
# ---------------------------------------------------------------------------

def _specialized_coeffs(
    f: LaurentPolynomial, coeffs_t: dict, xprime: np.ndarray
) -> tuple[np.ndarray, int]:
    """Univariate coefficients in the last variable at x' = xprime.

    Returns (array indexed from the lowest exponent, lowest exponent)."""
    n = f.nvars
    by_deg: dict[int, complex] = {}
    for a, c in coeffs_t.items():
        mono = c
        for i in range(n - 1):
            mono *= xprime[i] ** a[i]
        k = a[n - 1]
        by_deg[k] = by_deg.get(k, 0.0) + mono
    kmin, kmax = min(by_deg), max(by_deg)
    arr = np.zeros(kmax - kmin + 1, dtype=complex)
    for k, v in by_deg.items():
        arr[k - kmin] = v
    # strip exact zeros at the bottom: roots at the origin are excluded anyway
    nz = np.flatnonzero(arr != 0)
    if len(nz) == 0:
        return arr[:0], 0
    return arr[nz[0] :], kmin + int(nz[0])


def sample_hypersurface(
    f: LaurentPolynomial,
    s: ScaleFactor,
    count: int,
    window: Sequence[tuple[float, float]],
    seed: int,
) -> PointCloud:
    """Sample the rescaled amoeba of {f_t = 0} over a window.

    Draws the first n-1 coordinates as |t|^w with w uniform in the window
    (phases uniform), solves for the last variable, and keeps all nonzero
    roots.  Samples whose specialized polynomial is constant, or whose root
    finder fails, are skipped and counted in the metadata.
    """
    n = f.nvars
    if count < 1:
        raise ValueError("count must be >= 1")
    if len(window) != n:
        raise ValueError(f"window must have {n} intervals")
    exps_last = {a[n - 1] for a in f.support()}
    if len(exps_last) < 2:
        raise ValueError("polynomial must depend on the last variable")

    coeffs_t = f.coefficients_at(s.t)
    r = abs(s.t)
    logr = math.log(r)
    lo = np.array([w[0] for w in window[: n - 1]], dtype=float)
    hi = np.array([w[1] for w in window[: n - 1]], dtype=float)

    skip_degree = 0
    skip_nonconv = 0
    skip_residual = 0
    pts: list[np.ndarray] = []
    sols: list[np.ndarray] = []

    nchunks = (count + _CHUNK - 1) // _CHUNK
    children = np.random.SeedSequence(seed).spawn(nchunks)
    for idx, child in enumerate(children):
        m = min(count, (idx + 1) * _CHUNK) - idx * _CHUNK
        g = np.random.Generator(np.random.PCG64(child))
        ws = g.uniform(lo, hi, size=(m, n - 1)) if n > 1 else np.zeros((m, 0))
        thetas = g.uniform(0.0, 2.0 * np.pi, size=(m, n - 1))
        for j in range(m):
            xprime = np.exp(ws[j] * logr) * np.exp(1j * thetas[j])
            arr, _ = _specialized_coeffs(f, coeffs_t, xprime)
            if len(arr) <= 1:
                skip_degree += 1
                continue
            roots, ok = aberth_roots(arr)
            if not ok:
                skip_nonconv += 1
                continue
            roots = roots[np.abs(roots) > 0]
            for root in roots:
                x = np.concatenate([xprime, [root]])
                resid, scale = 0j, 0.0
                for a, c in coeffs_t.items():
                    mono = c
                    for xi, ai in zip(x, a):
                        mono *= xi**ai
                    resid += mono
                    scale += abs(mono)
                if scale > 0 and abs(resid) > RESIDUAL_REL_TOL * scale:
                    skip_residual += 1
                    continue
                pts.append(np.log(np.abs(x)) / logr)
                sols.append(x)

    points = np.array(pts) if pts else np.zeros((0, n))
    solutions = np.array(sols) if sols else np.zeros((0, n), dtype=complex)
    if len(points):
        order = np.lexsort(points.T[::-1])
        points = points[order]
        solutions = solutions[order]
    return PointCloud(
        points=points,
        solutions=solutions,
        t=s.t,
        metadata={
            "generator": repr(f),
            "window": [list(map(float, w)) for w in window],
            "seed": int(seed),
            "count": int(count),
            "skip_degree_zero": skip_degree,
            "skip_nonconvergence": skip_nonconv,
            "skip_residual": skip_residual,
        },
    )


def one_sided_hausdorff(
    cloud: PointCloud,
    V: PolyhedralComplex,
    window: Sequence[tuple[float, float]],
) -> float:
    """Max over in-window cloud points of the distance to the nearest cell."""
    pts = cloud.in_window(window)
    if len(pts) == 0:
        raise ValueError("no cloud points inside the window")
    return max(V.distance(p) for p in pts)


@dataclass
class ConvergenceRow:
    abs_t: float
    eps: float
    distance: float | None
    n_points: int
    skip_degree_zero: int
    skip_nonconvergence: int
    error: str | None = None


def convergence_report(
    f: LaurentPolynomial,
    V: PolyhedralComplex,
    t0: complex,
    rho: float,
    steps: int,
    count: int,
    window: Sequence[tuple[float, float]],
    seed: int,
) -> list[ConvergenceRow]:
    """Distance table along the geometric ray t_k = t0 * rho^k.

    Each row records |t|, eps, the one-sided Hausdorff distance of a fresh
    cloud (seeded per step) to V inside the window, and the skip counters.
    Rows where the window misses the cloud are flagged, not raised.
    """
    if not 0 < rho < 1:
        raise ValueError("ray ratio must satisfy 0 < rho < 1")
    rows = []
    for k in range(steps):
        t = t0 * rho**k
        s = ScaleFactor(t)
        child_seed = np.random.SeedSequence([seed, k]).generate_state(1)[0]
        cloud = sample_hypersurface(f, s, count, window, int(child_seed))
        md = cloud.metadata
        try:
            dist = one_sided_hausdorff(cloud, V, window)
            err = None
        except ValueError as e:
            dist, err = None, str(e)
        rows.append(
            ConvergenceRow(
                abs_t=abs(t),
                eps=s.eps,
                distance=dist,
                n_points=len(cloud),
                skip_degree_zero=md["skip_degree_zero"],
                skip_nonconvergence=md["skip_nonconvergence"],
                error=err,
            )
        )
    return rows
