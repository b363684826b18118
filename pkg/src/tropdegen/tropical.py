"""Min-plus polynomials, monomial valuations and tropical hypersurfaces.

A tropical polynomial is a finite map from integer exponent vectors to exact
rational weights; its value at w is min(alpha.w + c_alpha).  The
hypersurface is the locus where that minimum is achieved at least twice,
returned as an exact polyhedral complex: the cells are dual to the
positive-dimensional faces of the regular subdivision of the Newton
polytope induced by the weight lifting (equivalently, each cell is the
closed region where a fixed set of >= 2 terms is simultaneously minimal).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .laurent import LaurentPolynomial
from .polyhedral import (
    Polyhedron,
    PolyhedralComplex,
    Vec,
    as_fraction,
    as_vec,
    frac_to_str,
)

ExpVec = tuple[int, ...]


@dataclass(frozen=True)
class MonomialValuationPoint:
    """A point w of Q^n, indexing the monomial valuation val_w."""

    w: Vec

    def __init__(self, w):
        object.__setattr__(self, "w", as_vec(w))

    def __len__(self) -> int:
        return len(self.w)


class TropicalPolynomial:
    """Finite min-plus polynomial with exact rational weights."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[ExpVec, Fraction | int | str]):
        if not terms:
            raise ValueError("a tropical polynomial needs at least one term")
        clean: dict[ExpVec, Fraction] = {}
        for a, c in terms.items():
            a = tuple(int(x) for x in a)
            if len(a) != n:
                raise ValueError(f"exponent vector {a} has length != {n}")
            clean[a] = as_fraction(c)
        self.n = n
        self.terms = dict(sorted(clean.items()))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TropicalPolynomial)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        bits = [f"{a}:{frac_to_str(c)}" for a, c in self.terms.items()]
        return f"TropicalPolynomial(n={self.n}, {{{', '.join(bits)}}})"

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"exponent": list(a), "weight": frac_to_str(c)}
                for a, c in self.terms.items()
            ],
        }


def trop_from_poly(f: LaurentPolynomial) -> TropicalPolynomial:
    """Weight map alpha -> valuation of the coefficient series of alpha."""
    if f.is_zero:
        raise ValueError("the zero polynomial has no tropicalization")
    terms = {a: Fraction(int(c.valuation())) for a, c in f.terms.items()}
    return TropicalPolynomial(f.nvars, terms)


def trop_eval(
    f: TropicalPolynomial, w: MonomialValuationPoint
) -> tuple[Fraction, set[ExpVec]]:
    """Exact min over terms of alpha.w + c_alpha, with the full argmin set."""
    if len(w) != f.n:
        raise ValueError(f"point dimension {len(w)} != polynomial dimension {f.n}")
    best: Fraction | None = None
    argmin: set[ExpVec] = set()
    for a, c in f.terms.items():
        v = sum((ai * wi for ai, wi in zip(a, w.w)), start=Fraction(0)) + c
        if best is None or v < best:
            best, argmin = v, {a}
        elif v == best:
            argmin.add(a)
    assert best is not None
    return best, argmin


def in_tropical_hypersurface(f: TropicalPolynomial, w: MonomialValuationPoint) -> bool:
    """True iff the defining minimum is achieved by at least two terms."""
    _, argmin = trop_eval(f, w)
    return len(argmin) >= 2


def _pair_cell(f: TropicalPolynomial, active: frozenset[ExpVec]) -> Polyhedron:
    """H-representation of {w : all terms in `active` minimal}."""
    ref = min(active)
    cref = f.terms[ref]
    eqs = []
    for a in sorted(active):
        if a == ref:
            continue
        eqs.append(
            (tuple(Fraction(x - y) for x, y in zip(a, ref)), cref - f.terms[a])
        )
    ineqs = []
    for g, cg in f.terms.items():
        if g in active:
            continue
        ineqs.append(
            (tuple(Fraction(x - y) for x, y in zip(g, ref)), cref - cg)
        )
    return Polyhedron.make(f.n, eqs, ineqs)


def _true_active_set(f: TropicalPolynomial, cell: Polyhedron, active: frozenset[ExpVec]) -> frozenset[ExpVec]:
    """All terms minimal on the whole cell (tight at every vertex/ray/line)."""
    verts, rays, lines = cell.v_rep()
    ref = min(active)
    cref = f.terms[ref]
    out = set(active)
    for g, cg in f.terms.items():
        if g in out:
            continue
        diff = tuple(Fraction(x - y) for x, y in zip(g, ref))
        rhs = cref - cg
        if all(sum(d * v for d, v in zip(diff, vt)) == rhs for vt in verts) and all(
            sum(d * r for d, r in zip(diff, ry)) == 0 for ry in rays + lines
        ):
            out.add(g)
    return frozenset(out)


def tropical_hypersurface(f: TropicalPolynomial) -> PolyhedralComplex:
    """Exact non-linearity locus of the min-plus polynomial.

    Cells are keyed by their active term sets; the closure under pairwise
    unions of active sets produces every face, and incidence follows the
    reversed inclusion order of active sets.  A single-term input yields an
    empty complex with a warning.
    """
    cx = PolyhedralComplex(ambient_dim=f.n)
    if len(f.terms) < 2:
        cx.warnings.append(
            "single-term polynomial: the non-linearity locus is empty"
        )
        return cx

    cells: dict[frozenset[ExpVec], Polyhedron] = {}
    frontier: list[frozenset[ExpVec]] = []
    for pair in combinations(f.terms, 2):
        key = frozenset(pair)
        cell = _pair_cell(f, key)
        if cell.is_empty():
            continue
        true_key = _true_active_set(f, cell, key)
        if true_key not in cells:
            cells[true_key] = _pair_cell(f, true_key)
            frontier.append(true_key)

    # close under pairwise unions (faces shared by several maximal cells)
    known = set(cells)
    while frontier:
        nxt: list[frozenset[ExpVec]] = []
        for s1 in frontier:
            for s2 in list(known):
                union = s1 | s2
                if union in known or union == s1 or union == s2:
                    continue
                cell = _pair_cell(f, union)
                if cell.is_empty():
                    continue
                true_key = _true_active_set(f, cell, union)
                if true_key not in known:
                    cells[true_key] = _pair_cell(f, true_key)
                    known.add(true_key)
                    nxt.append(true_key)
        frontier = nxt

    order = sorted(cells, key=lambda s: (-len(s), sorted(s)))
    cx.cells = [cells[s] for s in order]
    cx.metadata = [
        {"active_terms": [list(a) for a in sorted(s)]} for s in order
    ]
    for i, si in enumerate(order):
        for j, sj in enumerate(order):
            if i != j and sj < si:
                cx.incidence.append((i, j))
    return cx


@dataclass
class PrevarietyResult:
    """Membership data for the intersection of the given tropical hypersurfaces.

    This is the prevariety of the GIVEN generators: it may strictly contain
    the tropicalization of the ideal they generate, which is why
    `is_prevariety_of_given_generators` is always True and a caveat string
    is attached.
    """

    generators: list[TropicalPolynomial]
    complexes: list[PolyhedralComplex]
    is_prevariety_of_given_generators: bool
    caveat: str

    def contains(self, w: MonomialValuationPoint) -> bool:
        return all(in_tropical_hypersurface(g, w) for g in self.generators)


def tropical_prevariety(fs: Sequence[TropicalPolynomial]) -> PrevarietyResult:
    """Conjunction of hypersurface membership over the given generators."""
    fs = list(fs)
    if not fs:
        raise ValueError("at least one generator is required")
    n = fs[0].n
    if any(g.n != n for g in fs):
        raise ValueError("generators must share the same ambient dimension")
    return PrevarietyResult(
        generators=fs,
        complexes=[tropical_hypersurface(g) for g in fs],
        is_prevariety_of_given_generators=True,
        caveat=(
            "computed from the given generators only; the tropicalization of "
            "the ideal may be strictly smaller"
        ),
    )
