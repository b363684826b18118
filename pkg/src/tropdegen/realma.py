"""Alexandrov real Monge-Ampere measures of convex piecewise-affine functions
and a semi-discrete solver for the prescribed-measure problem.

A convex PL function is a max of finitely many exact-rational affine pieces
on a polytope.  Its Monge-Ampere measure is atomic: the mass at a kink
vertex is the n-volume of the subdifferential there, i.e. of the convex
hull of the active gradients; everything is computed in exact rational
arithmetic for n <= 3.

The solver is the height-adjustment scheme of Oliker-Prussner type: node
masses are evaluated as volumes of the dual (power-type) cells in gradient
space, which have a direct H-representation in the heights, and heights are
lowered monotonically until every node's cell volume matches its target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .polyhedral import (
    Polyhedron,
    Vec,
    as_fraction,
    as_vec,
    frac_to_str,
    matrix_rank,
    primitive_vector,
    solve_unique,
)


# ---------------------------------------------------------------------------
# exact convex hull volumes (n <= 3)
# ---------------------------------------------------------------------------

def _hull_2d(points: list[Vec]) -> list[Vec]:
    """Counterclockwise convex hull (Andrew monotone chain), exact."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Vec] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Vec] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _shoelace(poly: list[Vec]) -> Fraction:
    area = Fraction(0)
    m = len(poly)
    for i in range(m):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % m]
        area += x1 * y2 - x2 * y1
    return abs(area) / 2


def _cross3(u: Vec, v: Vec) -> Vec:
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def hull_volume(points: Sequence, n: int) -> Fraction:
    """Exact n-volume of the convex hull of rational points, n in {1, 2, 3}."""
    pts = sorted({as_vec(p) for p in points})
    if not pts:
        return Fraction(0)
    if any(len(p) != n for p in pts):
        raise ValueError("point dimension mismatch")
    rows = [[c - d for c, d in zip(p, pts[0])] for p in pts[1:]]
    if matrix_rank(rows) < n:
        return Fraction(0)
    if n == 1:
        return pts[-1][0] - pts[0][0]
    if n == 2:
        return _shoelace(_hull_2d(pts))
    if n != 3:
        raise ValueError("hull_volume supports dimensions 1..3")

    # supporting planes by brute force; facet polygons ordered in 2-D charts
    planes: dict[tuple[Vec, Fraction], list[Vec]] = {}
    for i, j, k in combinations(range(len(pts)), 3):
        normal = _cross3(
            tuple(a - b for a, b in zip(pts[j], pts[i])),
            tuple(a - b for a, b in zip(pts[k], pts[i])),
        )
        if all(c == 0 for c in normal):
            continue
        off = sum(c * x for c, x in zip(normal, pts[i]))
        sides = [sum(c * x for c, x in zip(normal, p)) - off for p in pts]
        if all(s <= 0 for s in sides):
            pass
        elif all(s >= 0 for s in sides):
            normal = tuple(-c for c in normal)
            off = -off
            sides = [-s for s in sides]
        else:
            continue
        canon = primitive_vector(normal)
        i0 = next(i for i, c in enumerate(normal) if c != 0)
        key = (canon, off * canon[i0] / normal[i0])
        planes.setdefault(key, [p for p, sd in zip(pts, sides) if sd == 0])

    centroid = tuple(sum(p[i] for p in pts) / len(pts) for i in range(3))
    vol = Fraction(0)
    for (normal, _), on_plane in planes.items():
        drop = max(range(3), key=lambda i: abs(normal[i]))
        keep = [i for i in range(3) if i != drop]
        chart = {tuple(p[i] for i in keep): p for p in on_plane}
        poly2 = _hull_2d(list(chart))
        if len(poly2) < 3:
            continue
        ordered = [chart[q] for q in poly2]
        q0 = ordered[0]
        for a, b in zip(ordered[1:], ordered[2:]):
            e1 = tuple(x - y for x, y in zip(a, q0))
            e2 = tuple(x - y for x, y in zip(b, q0))
            e3 = tuple(x - y for x, y in zip(centroid, q0))
            det = (
                e1[0] * (e2[1] * e3[2] - e2[2] * e3[1])
                - e1[1] * (e2[0] * e3[2] - e2[2] * e3[0])
                + e1[2] * (e2[0] * e3[1] - e2[1] * e3[0])
            )
            vol += abs(det) / 6
    return vol


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexPLFunction:
    """max of affine pieces (gradient, offset) on a polytope domain."""

    pieces: tuple[tuple[Vec, Fraction], ...]
    domain: Polyhedron

    @staticmethod
    def make(pieces: Sequence, domain: Polyhedron) -> "ConvexPLFunction":
        norm = []
        for g, c in pieces:
            g = as_vec(g)
            if len(g) != domain.n:
                raise ValueError("piece gradient dimension mismatch")
            norm.append((g, as_fraction(c)))
        if not norm:
            raise ValueError("at least one affine piece is required")
        return ConvexPLFunction(tuple(sorted(set(norm))), domain)

    @property
    def n(self) -> int:
        return self.domain.n

    def value(self, w) -> Fraction:
        w = as_vec(w)
        return max(sum(g * x for g, x in zip(grad, w)) + c for grad, c in self.pieces)

    def value_float(self, w) -> float:
        w = np.asarray(w, dtype=float)
        G = np.array([[float(g) for g in grad] for grad, _ in self.pieces])
        c = np.array([float(c) for _, c in self.pieces])
        return float(np.max(G @ w + c))

    def values_float(self, ws: np.ndarray) -> np.ndarray:
        """Batched float evaluation at an (m, n) array of points."""
        ws = np.atleast_2d(np.asarray(ws, dtype=float))
        G = np.array([[float(g) for g in grad] for grad, _ in self.pieces])
        c = np.array([float(c) for _, c in self.pieces])
        return np.max(ws @ G.T + c[None, :], axis=1)

    def active_region(self, idx: int) -> Polyhedron:
        grad, c = self.pieces[idx]
        ineqs = list(self.domain.ineqs)
        for j, (g2, c2) in enumerate(self.pieces):
            if j == idx:
                continue
            ineqs.append(
                (tuple(a - b for a, b in zip(grad, g2)), c2 - c)
            )
        return Polyhedron(self.n, self.domain.eqs, tuple(ineqs))

    def redundant_pieces(self) -> list[int]:
        """Indices of pieces that are nowhere active on the domain."""
        return [i for i in range(len(self.pieces)) if self.active_region(i).is_empty()]

    def remove_redundant(self) -> "ConvexPLFunction":
        bad = set(self.redundant_pieces())
        keep = [p for i, p in enumerate(self.pieces) if i not in bad]
        return ConvexPLFunction(tuple(keep), self.domain)

    def to_json_dict(self) -> dict:
        return {
            "pieces": [
                {"gradient": [frac_to_str(g) for g in grad], "offset": frac_to_str(c)}
                for grad, c in self.pieces
            ],
            "domain": self.domain.to_json_dict(),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "ConvexPLFunction":
        pieces = [(p["gradient"], p["offset"]) for p in d["pieces"]]
        return ConvexPLFunction.make(pieces, Polyhedron.from_json_dict(d["domain"]))


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many atoms (rational point, positive rational mass)."""

    atoms: tuple[tuple[Vec, Fraction], ...]

    @staticmethod
    def make(atoms: Sequence) -> "AtomicMeasure":
        seen = {}
        for p, m in atoms:
            p = as_vec(p)
            m = as_fraction(m)
            if m <= 0:
                raise ValueError("atom masses must be positive")
            if p in seen:
                raise ValueError(f"duplicate atom at {p}")
            seen[p] = m
        return AtomicMeasure(tuple(sorted(seen.items())))

    @property
    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.atoms), start=Fraction(0))

    def mass_in(self, lo, hi) -> Fraction:
        lo, hi = as_vec(lo), as_vec(hi)
        return sum(
            (m for p, m in self.atoms if all(a <= x <= b for a, x, b in zip(lo, p, hi))),
            start=Fraction(0),
        )

    def to_json_dict(self) -> dict:
        return {
            "atoms": [
                {"point": [frac_to_str(x) for x in p], "mass": frac_to_str(m)}
                for p, m in self.atoms
            ]
        }

    @staticmethod
    def from_json_dict(d: dict) -> "AtomicMeasure":
        return AtomicMeasure.make([(a["point"], a["mass"]) for a in d["atoms"]])


# ---------------------------------------------------------------------------
# Alexandrov measure of a PL function
# ---------------------------------------------------------------------------

def _ma_1d(f: ConvexPLFunction) -> AtomicMeasure:
    """Upper envelope of lines: kinks and slope jumps in O(m log m)."""
    by_slope: dict[Fraction, Fraction] = {}
    for (g,), c in f.pieces:
        if g not in by_slope or c > by_slope[g]:
            by_slope[g] = c
    lines = sorted(by_slope.items())  # (slope, offset), increasing slope

    def crossing(l1, l2) -> Fraction:
        return (l1[1] - l2[1]) / (l2[0] - l1[0])

    stack: list[tuple[Fraction, Fraction]] = []
    for ln in lines:
        while len(stack) >= 2 and crossing(stack[-1], ln) <= crossing(stack[-2], stack[-1]):
            stack.pop()
        stack.append(ln)
    atoms = []
    for l1, l2 in zip(stack, stack[1:]):
        x = crossing(l1, l2)
        if f.domain.contains((x,), strict_ineqs=True):
            atoms.append(((x,), l2[0] - l1[0]))
    # merge atoms at equal kink locations (possible with > 2 concurrent lines)
    merged: dict[Vec, Fraction] = {}
    for p, m in atoms:
        merged[p] = merged.get(p, Fraction(0)) + m
    return AtomicMeasure.make(list(merged.items()))


def ma_alexandrov(f: ConvexPLFunction) -> AtomicMeasure:
    """Atoms at the interior kink vertices; mass = volume of the active
    gradient hull.  Exact for n <= 3."""
    n = f.n
    if f.domain.dim() != n:
        raise ValueError("domain must be full-dimensional")
    if n == 1:
        return _ma_1d(f)
    pieces = f.pieces
    found: dict[Vec, set[int]] = {}
    for S in combinations(range(len(pieces)), n + 1):
        g0, c0 = pieces[S[0]]
        rows = []
        rhs = []
        for idx in S[1:]:
            g, c = pieces[idx]
            rows.append([a - b for a, b in zip(g, g0)])
            rhs.append(c0 - c)
        v = solve_unique(rows, rhs)
        if v is None:
            continue
        val = sum(g * x for g, x in zip(g0, v)) + c0
        values = [sum(g * x for g, x in zip(grad, v)) + c for grad, c in pieces]
        if any(x > val for x in values):
            continue
        if not f.domain.contains(v, strict_ineqs=True):
            continue
        active = {i for i, x in enumerate(values) if x == val}
        found.setdefault(v, set()).update(active)
    atoms = []
    for v, active in found.items():
        vol = hull_volume([pieces[i][0] for i in active], n)
        if vol > 0:
            atoms.append((v, vol))
    return AtomicMeasure.make(atoms)


def gradient_hull_volume(f: ConvexPLFunction) -> Fraction:
    """Volume of the hull of the gradients active somewhere on the domain."""
    act = [
        f.pieces[i][0]
        for i in range(len(f.pieces))
        if not f.active_region(i).is_empty()
    ]
    return hull_volume(act, f.n)


# ---------------------------------------------------------------------------
# finite-difference oracle on grids
# ---------------------------------------------------------------------------

def ma_smooth_grid(values: np.ndarray, h: float) -> tuple[np.ndarray, int]:
    """det of the centered finite-difference Hessian at interior grid nodes.

    Negative determinants are clamped to zero and counted (non-convexity
    warning counter).  Supports 1-D and 2-D grids with >= 3 nodes per axis.
    """
    v = np.asarray(values, dtype=float)
    if any(s < 3 for s in v.shape):
        raise ValueError("need at least 3 grid points per axis")
    if v.ndim == 1:
        det = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    elif v.ndim == 2:
        fxx = (v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / h**2
        fyy = (v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]) / h**2
        fxy = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4 * h**2)
        det = fxx * fyy - fxy**2
    else:
        raise ValueError("only 1-D and 2-D grids are supported")
    clamped = int(np.sum(det < 0))
    return np.maximum(det, 0.0), clamped


# ---------------------------------------------------------------------------
# complex/real bridge in fiber dimension one
# ---------------------------------------------------------------------------

def verify_malog_dim1(
    f: ConvexPLFunction,
    d,
    s,
    intervals: Sequence[tuple[float, float]],
    grid_points: int = 4001,
) -> list[dict]:
    """Compare the pulled-back distributional Laplacian with eps * MA over
    sub-intervals of the rescaled-log chart.

    The chart is the last simplex coordinate of a fiber-dimension-1 toric
    degeneration; the pullback f(log|z|/log|t|) is radial, so the Laplacian
    mass over an annulus is the boundary-flux difference of the radial
    derivative, evaluated by central differences on a radial grid.  Both
    sides carry the common sheet/normalization factor b_0, so it cancels in
    the relative error but is reported in the absolute masses.
    """
    if d.p != 1:
        raise ValueError("this check runs in fiber dimension one")
    if f.n != 1:
        raise ValueError("f must be a function of the single chart coordinate")
    t = complex(s.t)
    if t.imag != 0 or t.real <= 0:
        raise ValueError("radial computation assumes t real and positive")
    logt = math.log(t.real)
    sheets = d.b[0]
    ma = ma_alexandrov(f)

    rows = []
    for alpha, beta in intervals:
        if not beta > alpha:
            raise ValueError("intervals must satisfy alpha < beta")
        # uniform grid in x = w * log t (radius coordinate log|z|)
        xs = np.linspace(beta * logt, alpha * logt, grid_points)
        hx = xs[1] - xs[0]
        if abs((beta - alpha) * logt) < 4 * abs(hx):
            raise ValueError("interval not resolved by the radial grid")
        z = np.exp(xs)  # |z| along the radial grid (phases drop out)
        ws = np.log(z) / logt
        g = f.values_float(ws[:, None])
        # flux g'(x) at both annulus boundaries by central differences
        gp_lo = (g[2] - g[0]) / (2 * hx)
        gp_hi = (g[-1] - g[-3]) / (2 * hx)
        complex_mass = sheets * (gp_hi - gp_lo)
        real_mass = s.eps * sheets * float(ma.mass_in([alpha], [beta]))
        denom = max(abs(real_mass), 1e-300)
        rel = abs(complex_mass - real_mass) / denom if real_mass != 0 else abs(
            complex_mass
        )
        rows.append(
            {
                "alpha": float(alpha),
                "beta": float(beta),
                "complex_mass": float(complex_mass),
                "real_mass": float(real_mass),
                "rel_error": float(rel),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# semi-discrete solver
# ---------------------------------------------------------------------------

def _hull_h_rep(points: list[Vec]) -> Polyhedron:
    """H-representation of the convex hull of rational points (n <= 2)."""
    n = len(points[0])
    if n == 1:
        xs = [p[0] for p in points]
        return Polyhedron.make(
            1, ineqs=[((Fraction(1),), min(xs)), ((Fraction(-1),), -max(xs))]
        )
    if n != 2:
        raise ValueError("hull H-representation implemented for n <= 2")
    hull = _hull_2d(points)
    if len(hull) < 3:
        raise ValueError("boundary points must span a full-dimensional domain")
    ineqs = []
    m = len(hull)
    for i in range(m):
        x1, y1 = hull[i]
        x2, y2 = hull[(i + 1) % m]
        # inward normal of the ccw edge
        a = (-(y2 - y1), x2 - x1)
        b = a[0] * x1 + a[1] * y1
        ineqs.append((a, b))
    return Polyhedron.make(2, ineqs=ineqs)


def _envelope_value(points: list[Vec], values: list[Fraction], x: Vec) -> Fraction | None:
    """Lower convex envelope of the lifted points, evaluated exactly at x."""
    n = len(x)
    best = None
    for size in range(1, n + 2):
        for S in combinations(range(len(points)), size):
            # barycentric coordinates of x in the chosen affine basis
            rows = [[points[i][k] for i in S] for k in range(n)]
            rows.append([Fraction(1)] * size)
            rhs = list(x) + [Fraction(1)]
            lam = solve_unique(rows, rhs)
            if lam is None or any(l < 0 for l in lam):
                continue
            val = sum(l * values[i] for l, i in zip(lam, S))
            if best is None or val < best:
                best = val
    return best


class SolverError(RuntimeError):
    pass


class InfeasibleTargetError(ValueError):
    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


_PBOX = 1e6  # gradient-space clip for unbounded boundary cells
_FEAS_SLACK = 1e-10


class _NodeCell:
    """Vertex/volume evaluator for the dual cell of one lifted point,
    {p : (x_j - x_q).p >= h_j - h_q for all q}, clipped to a large box.

    Constraint normals are height-independent, so the pairwise 2x2 solves
    are prefactored; per evaluation only the right-hand sides move.  Float
    pipeline; exactness is restored by the final measure check.
    """

    def __init__(self, xs: np.ndarray, j: int, n: int):
        self.j = j
        self.n = n
        self.others = np.array([q for q in range(len(xs)) if q != j])
        diff = xs[j] - xs[self.others]
        self.A = np.vstack([diff, np.eye(n), -np.eye(n)])
        self.box_rhs = np.full(2 * n, -_PBOX)
        if n == 2:
            m = len(self.A)
            idx_i, idx_j = np.triu_indices(m, k=1)
            M = np.stack([self.A[idx_i], self.A[idx_j]], axis=1)
            dets = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
            good = np.abs(dets) > 1e-12
            self.pi = idx_i[good]
            self.pj = idx_j[good]
            inv_det = 1.0 / dets[good]
            Mg = M[good]
            # P = [b_i, b_j] applied to the inverse of the 2x2 pair matrix
            self.c11 = Mg[:, 1, 1] * inv_det
            self.c12 = -Mg[:, 0, 1] * inv_det
            self.c21 = -Mg[:, 1, 0] * inv_det
            self.c22 = Mg[:, 0, 0] * inv_det

    def rhs(self, hs: np.ndarray) -> np.ndarray:
        return np.concatenate([hs[self.j] - hs[self.others], self.box_rhs])

    def vertices(self, hs: np.ndarray) -> np.ndarray:
        b = self.rhs(hs)
        if self.n == 1:
            lo, hi = -_PBOX, _PBOX
            for a, bb in zip(self.A[:, 0], b):
                if a > 1e-14:
                    lo = max(lo, bb / a)
                elif a < -1e-14:
                    hi = min(hi, bb / a)
                elif bb > _FEAS_SLACK:
                    return np.zeros((0, 1))
            if hi <= lo:
                return np.zeros((0, 1))
            return np.array([[lo], [hi]])
        bi, bj = b[self.pi], b[self.pj]
        px = self.c11 * bi + self.c12 * bj
        py = self.c21 * bi + self.c22 * bj
        P = np.stack([px, py], axis=1)
        feas = np.all(P @ self.A.T >= b[None, :] - _FEAS_SLACK, axis=1)
        P = P[feas]
        if len(P) == 0:
            return P
        P = P[np.lexsort(P.T[::-1])]
        keep = np.ones(len(P), dtype=bool)
        for i in range(1, len(P)):
            if np.linalg.norm(P[i] - P[i - 1]) < 1e-9:
                keep[i] = False
        return P[keep]

    def volume(self, hs: np.ndarray) -> float:
        P = self.vertices(hs)
        if self.n == 1:
            return float(P[1, 0] - P[0, 0]) if len(P) == 2 else 0.0
        if len(P) < 3:
            return 0.0
        ctr = P.mean(axis=0)
        ang = np.arctan2(P[:, 1] - ctr[1], P[:, 0] - ctr[0])
        Q = P[np.argsort(ang)]
        x, y = Q[:, 0], Q[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, 1)) - np.dot(y, np.roll(x, 1))))


def feasible_mass_bound(boundary: Sequence) -> float:
    """Upper bound on the placeable interior mass.

    With boundary data on the boundary of its own convex hull, every slope
    admits an affine minorant touching inside the closed domain, so the
    subdifferential of the boundary envelope over the closure is all of R^n
    and the bound is infinite; it is kept explicit so genuinely restricted
    variants can tighten it.
    """
    return math.inf


def solve_rma(
    target: AtomicMeasure,
    boundary: Sequence[tuple[Sequence, object]],
    *,
    max_sweeps: int = 10**5,
    tol_rel: float = 1e-9,
) -> ConvexPLFunction:
    """Recover the convex PL function with prescribed kink masses.

    target: atoms at interior nodes of the domain = convex hull of the
    boundary points; boundary: (point, value) pairs of a convex function on
    the hull boundary (all kinks of the data along the boundary included).
    Heights start at the boundary-data envelope and are lowered node by
    node (bisection on the monotone cell volume, damping 1/2 on overshoot)
    until every subdifferential volume matches its target within
    tol_rel * total mass.
    """
    bpts = [as_vec(p) for p, _ in boundary]
    bvals = [as_fraction(v) for _, v in boundary]
    if len({len(p) for p in bpts}) != 1:
        raise ValueError("boundary points must share a dimension")
    n = len(bpts[0])
    if n not in (1, 2):
        raise ValueError("solver implemented for dimensions 1 and 2")
    domain = _hull_h_rep(bpts)
    if domain.dim() != n:
        raise ValueError("boundary points must span a full-dimensional domain")

    env_at = lambda x: _envelope_value(bpts, bvals, x)
    for p, v in zip(bpts, bvals):
        ev = env_at(p)
        if ev is None or ev < v:
            raise ValueError(
                f"boundary data is not convex at {tuple(map(float, p))}"
            )

    nodes = [p for p, _ in target.atoms]
    masses = np.array([float(m) for _, m in target.atoms])
    for p in nodes:
        if not domain.contains(p, strict_ineqs=True):
            raise ValueError(f"target atom {tuple(map(float, p))} is not interior")
    total = float(target.total_mass)
    bound = feasible_mass_bound(boundary)
    if total > bound:
        raise InfeasibleTargetError(
            f"total target mass {total} exceeds the feasible bound {bound}", bound
        )
    tol = tol_rel * total if total > 0 else tol_rel

    k = len(nodes)
    xs = np.array([[float(c) for c in p] for p in nodes + bpts])
    hs = np.empty(len(xs))
    for j, p in enumerate(nodes):
        hs[j] = float(env_at(p))
    hs[k:] = [float(v) for v in bvals]
    cells = [_NodeCell(xs, j, n) for j in range(k)]

    def solve_node(j: int, mu: float):
        # cell volume is nonincreasing in the node height; lower to grow
        cell = cells[j]
        h0 = hs[j]
        m0 = cell.volume(hs)
        if abs(m0 - mu) <= 0.05 * tol:
            return

        def fn(h: float) -> float:
            hs[j] = h
            return cell.volume(hs) - mu

        step = max(1.0, abs(h0)) * 1e-3
        if m0 < mu:
            lo, hi = h0 - step, h0
            while fn(lo) < 0:
                step *= 2.0
                lo -= step
                if step > 1e12:
                    raise SolverError("node height diverged during bracketing")
        else:
            lo, hi = h0, h0 + step
            while fn(hi) > 0:
                step *= 2.0
                hi += step
                if step > 1e12:
                    raise SolverError("node height diverged during bracketing")
        root = brentq(fn, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if m0 > mu:
            root = h0 + 0.5 * (root - h0)  # damp raises after overshoot
        hs[j] = root

    converged = False
    residual = math.inf
    for _ in range(max_sweeps):
        for j in range(k):
            solve_node(j, masses[j])
        residual = (
            max(abs(cells[j].volume(hs) - masses[j]) for j in range(k)) if k else 0.0
        )
        if residual <= tol:
            converged = True
            break
    if not converged:
        raise SolverError(
            f"no convergence within {max_sweeps} sweeps; mass residual {residual:.3e}"
        )

    # assemble the exact PL function from the dual cell vertices
    pieces: dict[tuple, tuple[Vec, Fraction]] = {}
    for q in range(len(xs)):
        verts = _NodeCell(xs, q, n).vertices(hs)
        for p in verts:
            if np.max(np.abs(p)) > 0.5 * _PBOX:
                continue
            ell_at = xs @ p - (float(np.dot(p, xs[q])) - hs[q])
            touch = np.flatnonzero(ell_at >= hs - 1e-7)
            if len(touch) < n + 1:
                continue
            span = xs[touch] - xs[touch[0]]
            if np.linalg.matrix_rank(span, tol=1e-9) < n:
                continue
            key = tuple(np.round(p, 9))
            if key not in pieces:
                grad = tuple(Fraction(float(c)) for c in p)
                off = Fraction(float(hs[q])) - sum(
                    g * c for g, c in zip(grad, as_vec(nodes[q] if q < k else bpts[q - k]))
                )
                pieces[key] = (grad, off)
    if not pieces:
        raise SolverError("piece extraction found no supporting facets")
    return ConvexPLFunction.make(list(pieces.values()), domain)
