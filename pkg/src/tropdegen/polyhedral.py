"""Exact rational polyhedra, weighted simplices and their Lebesgue normalization.

All combinatorial geometry in this package runs on `fractions.Fraction`;
floats are rejected at the type boundary so that predicates like "minimum
achieved twice" or "point on a face" never depend on rounding.  Polyhedra
are stored in H-representation (equalities a.w = b and inequalities
a.w >= b) and converted to a V-representation (vertices, rays, lines) on
demand by brute-force basis enumeration, which is exact and fast at the
small dimensions (<= 3, a handful of constraints) this package needs.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Vec = tuple[Fraction, ...]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to Fraction; reject floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"exact rational expected, got {type(x).__name__}: {x!r}")


def frac_to_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def as_vec(v) -> Vec:
    return tuple(as_fraction(c) for c in v)


# ---------------------------------------------------------------------------
# exact linear algebra
# ---------------------------------------------------------------------------

def _rref(mat: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form (in place on a copy); returns (rows, pivot cols)."""
    rows = [list(r) for r in mat]
    m = len(rows)
    n = len(rows[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return rows, pivots


def matrix_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    _, piv = _rref([list(r) for r in rows])
    return len(piv)


def nullspace(rows: Sequence[Sequence[Fraction]], n: int) -> list[Vec]:
    """Basis of {v : A v = 0} for the row matrix A with n columns."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    red, piv = _rref([list(r) for r in rows])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, pc in enumerate(piv):
            v[pc] = -red[r][fc]
        basis.append(tuple(v))
    return basis


def solve_unique(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Vec | None:
    """Unique solution of A x = b, or None if inconsistent or underdetermined."""
    if not rows:
        return None
    n = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = _rref(aug)
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            return None
    piv_cols = [c for c in piv if c < n]
    if len(piv_cols) < n:
        return None
    sol = [Fraction(0)] * n
    for r, c in enumerate(piv_cols):
        sol[c] = red[r][-1]
    return tuple(sol)


def primitive_vector(v: Vec) -> Vec:
    """Scale a nonzero rational vector to coprime integers, keeping orientation."""
    den = math.lcm(*(c.denominator for c in v))
    ints = [c.numerator * (den // c.denominator) for c in v]
    g = math.gcd(*(abs(x) for x in ints))
    return tuple(Fraction(x // g) for x in ints)


_primitive = primitive_vector


# ---------------------------------------------------------------------------
# polyhedra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polyhedron:
    """H-representation polyhedron {w : eq.w = rhs, ineq.w >= rhs} over Q."""

    n: int
    eqs: tuple[tuple[Vec, Fraction], ...] = ()
    ineqs: tuple[tuple[Vec, Fraction], ...] = ()

    @staticmethod
    def make(n: int, eqs: Iterable = (), ineqs: Iterable = ()) -> "Polyhedron":
        def norm(cs):
            out = []
            for a, b in cs:
                a = as_vec(a)
                if len(a) != n:
                    raise ValueError(f"constraint length {len(a)} != ambient {n}")
                out.append((a, as_fraction(b)))
            return tuple(out)

        return Polyhedron(n, norm(eqs), norm(ineqs))

    @staticmethod
    def box(lo: Sequence, hi: Sequence) -> "Polyhedron":
        lo, hi = as_vec(lo), as_vec(hi)
        n = len(lo)
        ineqs = []
        for i in range(n):
            e = tuple(Fraction(int(j == i)) for j in range(n))
            ineqs.append((e, lo[i]))
            ineqs.append((tuple(-c for c in e), -hi[i]))
        return Polyhedron(n, (), tuple(ineqs))

    # -- V-representation ---------------------------------------------------

    def v_rep(self) -> tuple[list[Vec], list[Vec], list[Vec]]:
        """(vertices, rays, lines); empty vertex list means empty polyhedron."""
        return _cached_v_rep(self)

    def _compute_v_rep(self):
        n = self.n
        eqs, ineqs = [], []
        for a, b in self.eqs:
            if all(c == 0 for c in a):
                if b != 0:
                    return [], [], []
                continue
            eqs.append((a, b))
        for a, b in self.ineqs:
            if all(c == 0 for c in a):
                if b > 0:
                    return [], [], []
                continue
            ineqs.append((a, b))

        normals = [a for a, _ in eqs] + [a for a, _ in ineqs]
        lines = nullspace(normals, n)
        if not normals:
            return [tuple(Fraction(0) for _ in range(n))], [], lines

        # complement of the lineality space: row space of the constraint matrix
        red, piv = _rref([list(a) for a in normals])
        W = [tuple(red[r]) for r in range(len(piv))]  # basis vectors in R^n
        k = len(W)

        def transform(a: Vec) -> Vec:
            return tuple(sum(a[j] * w[j] for j in range(n)) for w in W)

        teqs = [(transform(a), b) for a, b in eqs]
        tineqs = [(transform(a), b) for a, b in ineqs]
        eq_rows = [list(a) for a, _ in teqs]
        r_eq = matrix_rank(eq_rows) if eq_rows else 0

        def lift(u: Vec) -> Vec:
            return tuple(sum(u[i] * W[i][j] for i in range(k)) for j in range(n))

        def feasible(u: Vec) -> bool:
            return all(sum(a[i] * u[i] for i in range(k)) >= b for a, b in tineqs) and all(
                sum(a[i] * u[i] for i in range(k)) == b for a, b in teqs
            )

        vertices: list[Vec] = []
        seen = set()
        need = k - r_eq
        from itertools import combinations

        for subset in combinations(range(len(tineqs)), need):
            rows = eq_rows + [list(tineqs[i][0]) for i in subset]
            rhs = [b for _, b in teqs] + [tineqs[i][1] for i in subset]
            u = solve_unique(rows, rhs)
            if u is None or not feasible(u):
                continue
            if u not in seen:
                seen.add(u)
                vertices.append(u)

        rays: list[Vec] = []
        seen_r = set()
        if need >= 1:
            for subset in combinations(range(len(tineqs)), need - 1):
                rows = eq_rows + [list(tineqs[i][0]) for i in subset]
                ns = nullspace(rows, k)
                if len(ns) != 1:
                    continue
                d = ns[0]
                for cand in (d, tuple(-c for c in d)):
                    if all(sum(a[i] * cand[i] for i in range(k)) >= 0 for a, _ in tineqs) and all(
                        sum(a[i] * cand[i] for i in range(k)) == 0 for a, _ in teqs
                    ):
                        p = _primitive(cand)
                        if p not in seen_r:
                            seen_r.add(p)
                            rays.append(p)

        return (
            sorted(lift(u) for u in vertices),
            sorted(lift(d) for d in rays),
            sorted(lines),
        )

    # -- basic queries -------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.v_rep()[0]

    def dim(self) -> int:
        verts, rays, lines = self.v_rep()
        if not verts:
            return -1
        v0 = verts[0]
        rows = [[a - b for a, b in zip(v, v0)] for v in verts[1:]]
        rows += [list(r) for r in rays] + [list(li) for li in lines]
        return matrix_rank(rows) if rows else 0

    def contains(self, point, strict_ineqs: bool = False) -> bool:
        w = as_vec(point)
        for a, b in self.eqs:
            if sum(x * y for x, y in zip(a, w)) != b:
                return False
        for a, b in self.ineqs:
            s = sum(x * y for x, y in zip(a, w))
            if s < b or (strict_ineqs and s == b):
                return False
        return True

    def contains_float(self, point, tol: float = 1e-9) -> bool:
        w = np.asarray(point, dtype=float)
        for a, b in self.eqs:
            if abs(float(np.dot([float(c) for c in a], w)) - float(b)) > tol:
                return False
        for a, b in self.ineqs:
            if float(np.dot([float(c) for c in a], w)) < float(b) - tol:
                return False
        return True

    def sample_points(self) -> list[Vec]:
        """Rational points covering the cell: vertices, edge midpoints, ray probes."""
        verts, rays, lines = self.v_rep()
        pts: list[Vec] = list(verts)
        for i in range(len(verts)):
            for j in range(i + 1, len(verts)):
                pts.append(tuple((a + b) / 2 for a, b in zip(verts[i], verts[j])))
        for v in verts:
            for r in rays + lines:
                pts.append(tuple(a + b for a, b in zip(v, r)))
                pts.append(tuple(a + 2 * b for a, b in zip(v, r)))
            for li in lines:
                pts.append(tuple(a - b for a, b in zip(v, li)))
        return pts

    # -- float distance -------------------------------------------------------

    def distance(self, point) -> float:
        """Euclidean distance from a float point to this polyhedron."""
        verts, _, _ = self.v_rep()
        if not verts:
            raise ValueError("distance to an empty polyhedron")
        p = np.asarray(point, dtype=float)
        if self.eqs:
            A = np.array([[float(c) for c in a] for a, _ in self.eqs])
            b = np.array([float(b) for _, b in self.eqs])
            # projection onto the affine hull (minimum-norm correction)
            corr, *_ = np.linalg.lstsq(A, A @ p - b, rcond=None)
            proj = p - corr
        else:
            proj = p
        ok = all(
            float(np.dot([float(c) for c in a], proj)) >= float(b) - 1e-9
            for a, b in self.ineqs
        )
        if ok:
            return float(np.linalg.norm(p - proj))
        best = math.inf
        for i in range(len(self.ineqs)):
            a, b = self.ineqs[i]
            facet = Polyhedron(
                self.n,
                self.eqs + ((a, b),),
                tuple(c for j, c in enumerate(self.ineqs) if j != i),
            )
            if facet.is_empty():
                continue
            best = min(best, facet.distance(point))
        if best is math.inf:  # no facet: affine subspace without inequalities
            return float(np.linalg.norm(p - proj))
        return best

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "ambient_dim": self.n,
            "equalities": [[*map(frac_to_str, a), frac_to_str(b)] for a, b in self.eqs],
            "inequalities": [[*map(frac_to_str, a), frac_to_str(b)] for a, b in self.ineqs],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Polyhedron":
        n = d["ambient_dim"]
        eqs = [(row[:-1], row[-1]) for row in d.get("equalities", [])]
        ineqs = [(row[:-1], row[-1]) for row in d.get("inequalities", [])]
        return Polyhedron.make(n, eqs, ineqs)


@functools.lru_cache(maxsize=4096)
def _cached_v_rep(p: Polyhedron):
    return p._compute_v_rep()


@dataclass
class PolyhedralComplex:
    """A list of exact cells plus the face-incidence relation between them.

    incidence holds pairs (i, j) meaning cells[i] is a face of cells[j].
    """

    ambient_dim: int
    cells: list[Polyhedron] = field(default_factory=list)
    metadata: list[dict] = field(default_factory=list)
    incidence: list[tuple[int, int]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def f_vector(self) -> tuple[int, ...]:
        if not self.cells:
            return ()
        dims = [c.dim() for c in self.cells]
        top = max(dims)
        return tuple(sum(1 for d in dims if d == k) for k in range(top + 1))

    def distance(self, point) -> float:
        if not self.cells:
            raise ValueError("distance to an empty complex")
        return min(c.distance(point) for c in self.cells)

    def to_json_dict(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "cells": [
                {**c.to_json_dict(), "dim": c.dim(), **md}
                for c, md in zip(self.cells, self.metadata)
            ],
            "incidence": [list(p) for p in self.incidence],
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# weighted simplices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedSimplex:
    """Simplex {w >= 0, sum_i b_i w_i = 1} in R^J with positive integer weights b.

    Vertices are e_i / b_i; the dimension is |J| - 1.
    """

    labels: tuple[str, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.b) or not self.labels:
            raise ValueError("labels and b must be nonempty and of equal length")
        if any((not isinstance(x, int)) or x < 1 for x in self.b):
            raise ValueError("multiplicities must be positive integers")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")

    @property
    def dim(self) -> int:
        return len(self.b) - 1

    def vertices(self) -> list[Vec]:
        k = len(self.b)
        return [
            tuple(Fraction(int(i == j), self.b[i]) for j in range(k))
            for i in range(k)
        ]

    def contains(self, w, tol: float | None = None) -> bool:
        if tol is None:
            w = as_vec(w)
            return all(x >= 0 for x in w) and sum(
                bi * x for bi, x in zip(self.b, w)
            ) == 1
        w = np.asarray(w, dtype=float)
        return bool(
            np.all(w >= -tol)
            and abs(float(np.dot(np.asarray(self.b, dtype=float), w)) - 1.0) <= tol
        )

    def polyhedron(self) -> Polyhedron:
        k = len(self.b)
        eqs = [(tuple(Fraction(bi) for bi in self.b), Fraction(1))]
        ineqs = [
            (tuple(Fraction(int(j == i)) for j in range(k)), Fraction(0))
            for i in range(k)
        ]
        return Polyhedron.make(k, eqs, ineqs)

    def to_json_dict(self) -> dict:
        return {"labels": list(self.labels), "b": list(self.b)}

    @staticmethod
    def from_json_dict(d: dict) -> "WeightedSimplex":
        return WeightedSimplex(tuple(d["labels"]), tuple(int(x) for x in d["b"]))


def sigma_H_volume(s: WeightedSimplex) -> Fraction:
    """Volume of the simplex under the hyperplane Lebesgue measure.

    The normalization is the co-area convention for the linear form b.w:
    eliminate any coordinate i0 and take 1/b_{i0} times Lebesgue measure in
    the remaining coordinates.  The result 1/(prod(b) * (|J|-1)!) does not
    depend on i0; `_sigma_H_volume_eliminating` exposes the per-coordinate
    computation so tests can assert that independence.
    """
    return _sigma_H_volume_eliminating(s, 0)


def _sigma_H_volume_eliminating(s: WeightedSimplex, i0: int) -> Fraction:
    k = len(s.b)
    if not 0 <= i0 < k:
        raise ValueError("eliminated index out of range")
    # remaining region {w_i >= 0, sum b_i w_i <= 1}: a coordinate-scaled
    # simplex of Lebesgue volume (prod 1/b_i)/ (k-1)!
    vol = Fraction(1)
    for i in range(k):
        if i != i0:
            vol /= s.b[i]
    vol /= math.factorial(k - 1)
    return vol / s.b[i0]


_SAMPLE_CHUNK = 4096


def sample_uniform(s: WeightedSimplex, rng_seed: int, count: int) -> np.ndarray:
    """I.i.d. points under the normalized Lebesgue measure of the simplex.

    Exponential spacings through the vertex parametrization; chunked over
    spawned seed streams so results are reproducible and independent of any
    parallel execution order.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    k = len(s.b)
    binv = 1.0 / np.asarray(s.b, dtype=float)
    nchunks = (count + _SAMPLE_CHUNK - 1) // _SAMPLE_CHUNK
    children = np.random.SeedSequence(rng_seed).spawn(nchunks)
    out = np.empty((count, k), dtype=float)
    for idx, child in enumerate(children):
        lo = idx * _SAMPLE_CHUNK
        hi = min(count, lo + _SAMPLE_CHUNK)
        g = np.random.Generator(np.random.PCG64(child))
        e = g.standard_exponential((hi - lo, k))
        lam = e / e.sum(axis=1, keepdims=True)
        out[lo:hi] = lam * binv[None, :]
    return out


def face(s: WeightedSimplex, subset: Sequence[str]) -> WeightedSimplex:
    """Sub-simplex where w_i = 0 for labels outside `subset`."""
    sub = tuple(subset)
    if not sub:
        raise ValueError("face subset must be nonempty")
    missing = [x for x in sub if x not in s.labels]
    if missing:
        raise ValueError(f"labels not in simplex: {missing}")
    keep = [i for i, lab in enumerate(s.labels) if lab in sub]
    return WeightedSimplex(
        tuple(s.labels[i] for i in keep), tuple(s.b[i] for i in keep)
    )


@dataclass(frozen=True)
class WeightedSimplexMeasure:
    """Normalized Lebesgue measure of a weighted simplex scaled to a mass."""

    simplex: WeightedSimplex
    mass: float | Fraction

    def __post_init__(self):
        if isinstance(self.mass, float):
            if not (self.mass >= 0 and math.isfinite(self.mass)):
                raise ValueError("mass must be a finite nonnegative number")
        else:
            if as_fraction(self.mass) < 0:
                raise ValueError("mass must be nonnegative")

    def to_json_dict(self) -> dict:
        m = self.mass
        return {
            "simplex": self.simplex.to_json_dict(),
            "mass": frac_to_str(m) if isinstance(m, Fraction) else float(m),
        }
