"""Combinatorics of degenerations with normal-crossing central fiber.

The data is purely combinatorial: component labels with positive integer
multiplicities b_i, rational coefficients a_i, the family of nonempty
strata (an abstract simplicial complex on the labels), and optional
per-face masses standing in for the residual-measure integrals that live
on actual varieties.  From this we build the dual complex embedded in the
hyperplane {sum b_i w_i = 1}, the invariants kappa_i = a_i / b_i, the
essential subcomplex where the minimum kappa is attained, and the limit
measure: normalized Lebesgue measures on the top-dimensional essential
faces weighted by their masses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .polyhedral import (
    Polyhedron,
    Vec,
    WeightedSimplex,
    WeightedSimplexMeasure,
    as_fraction,
    frac_to_str,
)

FaceKey = frozenset[str]


def _facekey(labels) -> FaceKey:
    return frozenset(str(x) for x in labels)


@dataclass(frozen=True)
class SncCombinatorics:
    """Stratified model data: labels, multiplicities, coefficients, strata."""

    labels: tuple[str, ...]
    b: tuple[int, ...]
    a: tuple[Fraction, ...]
    strata: frozenset[FaceKey]
    masses: Mapping[FaceKey, float] | None = None

    @staticmethod
    def make(
        components: Sequence[tuple[str, int, Fraction | int | str]],
        strata: Sequence[Sequence[str]],
        masses: Mapping | None = None,
    ) -> "SncCombinatorics":
        labels = tuple(str(c[0]) for c in components)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate component labels")
        b = tuple(int(c[1]) for c in components)
        if any(x < 1 for x in b):
            raise ValueError("multiplicities must be positive integers")
        a = tuple(as_fraction(c[2]) for c in components)
        fam = {_facekey(J) for J in strata}
        fam |= {frozenset({lab}) for lab in labels}
        for J in fam:
            unknown = J - set(labels)
            if unknown:
                raise ValueError(f"stratum {sorted(J)} uses unknown labels {sorted(unknown)}")
        for J in sorted(fam, key=lambda s: (len(s), sorted(s))):
            for drop in J:
                sub = J - {drop}
                if sub and sub not in fam:
                    raise ValueError(
                        "strata not closed under nonempty subsets: "
                        f"{sorted(sub)} missing (from {sorted(J)})"
                    )
        mm = None
        if masses is not None:
            mm = {_facekey(k.split(",")) if isinstance(k, str) else _facekey(k): float(v)
                  for k, v in masses.items()}
            for J in mm:
                if J not in fam:
                    raise ValueError(f"mass given for non-stratum {sorted(J)}")
        return SncCombinatorics(labels, b, a, frozenset(fam), mm)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def b_of(self, label: str) -> int:
        return self.b[self.index(label)]

    def a_of(self, label: str) -> Fraction:
        return self.a[self.index(label)]

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        d = {
            "components": [
                {"label": lab, "b": bi, "a": frac_to_str(ai)}
                for lab, bi, ai in zip(self.labels, self.b, self.a)
            ],
            "strata": sorted(
                (sorted(J) for J in self.strata), key=lambda s: (len(s), s)
            ),
        }
        if self.masses is not None:
            d["masses"] = {
                ",".join(sorted(J)): v
                for J, v in sorted(self.masses.items(), key=lambda kv: sorted(kv[0]))
            }
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "SncCombinatorics":
        comps = [(c["label"], int(c["b"]), as_fraction(c["a"])) for c in d["components"]]
        return SncCombinatorics.make(comps, d["strata"], d.get("masses"))

    @staticmethod
    def from_json(text: str) -> "SncCombinatorics":
        return SncCombinatorics.from_json_dict(json.loads(text))


def fermat_model(n: int) -> SncCombinatorics:
    """Model of the degree-(n+2) Fermat pencil chart: n+2 reduced components
    whose dual complex is the boundary of an (n+1)-simplex."""
    labels = [f"E{i}" for i in range(n + 2)]
    strata = []
    from itertools import combinations

    for k in range(1, n + 2):
        strata.extend(combinations(labels, k))
    return SncCombinatorics.make([(lab, 1, 0) for lab in labels], strata)


# ---------------------------------------------------------------------------
# dual complex
# ---------------------------------------------------------------------------

@dataclass
class DualComplex:
    """Simplices Delta_J in the hyperplane {b.w = 1} of R^I, glued by faces."""

    model: SncCombinatorics
    faces: list[FaceKey] = field(default_factory=list)
    simplices: dict[FaceKey, WeightedSimplex] = field(default_factory=dict)

    def f_vector(self) -> tuple[int, ...]:
        top = max(len(J) for J in self.faces)
        return tuple(
            sum(1 for J in self.faces if len(J) == k + 1) for k in range(top)
        )

    @property
    def dim(self) -> int:
        return max(len(J) for J in self.faces) - 1

    def embedded_cell(self, J: FaceKey) -> Polyhedron:
        labels = self.model.labels
        n = len(labels)
        eqs = [(tuple(Fraction(bi) for bi in self.model.b), Fraction(1))]
        ineqs = []
        for i, lab in enumerate(labels):
            e = tuple(Fraction(int(j == i)) for j in range(n))
            if lab in J:
                ineqs.append((e, Fraction(0)))
            else:
                eqs.append((e, Fraction(0)))
        return Polyhedron.make(n, eqs, ineqs)

    def to_json_dict(self) -> dict:
        return {
            "hyperplane_b": list(self.model.b),
            "labels": list(self.model.labels),
            "f_vector": list(self.f_vector()),
            "faces": [
                {"J": sorted(J), **self.simplices[J].to_json_dict()}
                for J in sorted(self.faces, key=lambda s: (len(s), sorted(s)))
            ],
        }


def dual_complex(m: SncCombinatorics) -> DualComplex:
    """One weighted simplex per stratum, realized inside {b.w = 1}."""
    dc = DualComplex(model=m)
    for J in sorted(m.strata, key=lambda s: (len(s), sorted(s))):
        labs = tuple(sorted(J))
        dc.faces.append(J)
        dc.simplices[J] = WeightedSimplex(labs, tuple(m.b_of(x) for x in labs))
    return dc


def log_of_monomial(m: SncCombinatorics, w, tol: float = 1e-9):
    """Identity on the embedded dual complex: the section property means a
    point of a realized face maps to itself.  Rejects points outside every
    face, naming the violated condition."""
    labels = m.labels
    exact = all(not isinstance(x, float) for x in w)
    if exact:
        vec: Vec = tuple(as_fraction(x) for x in w)
        if len(vec) != len(labels):
            raise ValueError("point dimension does not match the component count")
        if any(x < 0 for x in vec):
            raise ValueError("point has a negative coordinate")
        total = sum(bi * x for bi, x in zip(m.b, vec))
        if total != 1:
            raise ValueError(f"point violates b.w = 1 (b.w = {total})")
        support = _facekey(lab for lab, x in zip(labels, vec) if x != 0)
    else:
        arr = np.asarray([float(x) for x in w], dtype=float)
        if arr.shape != (len(labels),):
            raise ValueError("point dimension does not match the component count")
        if np.any(arr < -tol):
            raise ValueError("point has a negative coordinate")
        if abs(float(np.dot(arr, np.asarray(m.b, float))) - 1.0) > tol:
            raise ValueError("point violates b.w = 1")
        support = _facekey(lab for lab, x in zip(labels, arr) if x > tol)
    if support and support not in m.strata:
        raise ValueError(f"support {sorted(support)} is not a stratum")
    return tuple(w)


# ---------------------------------------------------------------------------
# kappa and the essential complex
# ---------------------------------------------------------------------------

def kappa(m: SncCombinatorics) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Per-component ratios a_i / b_i and their minimum."""
    per = tuple(ai / bi for ai, bi in zip(m.a, m.b))
    return min(per), per


def normalize_kappa(m: SncCombinatorics) -> SncCombinatorics:
    """Shift coefficients so the minimum ratio becomes zero: a_i -= kappa*b_i."""
    k, _ = kappa(m)
    return SncCombinatorics(
        m.labels,
        m.b,
        tuple(ai - k * bi for ai, bi in zip(m.a, m.b)),
        m.strata,
        m.masses,
    )


@dataclass
class EssentialComplex:
    kappa: Fraction
    faces: list[FaceKey]
    dim: int
    maximal_faces: list[FaceKey]
    top_faces: list[FaceKey]

    def to_json_dict(self) -> dict:
        return {
            "kappa": frac_to_str(self.kappa),
            "dim": self.dim,
            "faces": sorted((sorted(J) for J in self.faces), key=lambda s: (len(s), s)),
            "maximal_faces": sorted(
                (sorted(J) for J in self.maximal_faces), key=lambda s: (len(s), s)
            ),
        }


def essential_complex(m: SncCombinatorics) -> EssentialComplex:
    """Faces J (strata) with a_i/b_i = kappa for every i in J.

    Maximal essential faces correspond to the minimal essential strata of
    the model; `dim` is the essential dimension, the top dimension among
    essential faces.
    """
    k, per = kappa(m)
    ess_labels = {lab for lab, r in zip(m.labels, per) if r == k}
    faces = [J for J in m.strata if J <= ess_labels]
    d = max(len(J) for J in faces) - 1
    maximal = [J for J in faces if not any(J < K for K in faces)]
    top = [J for J in faces if len(J) - 1 == d]
    order = lambda J: (len(J), sorted(J))
    return EssentialComplex(
        kappa=k,
        faces=sorted(faces, key=order),
        dim=d,
        maximal_faces=sorted(maximal, key=order),
        top_faces=sorted(top, key=order),
    )


def limit_measure(
    m: SncCombinatorics, *, default_mass: float | None = None
) -> list[WeightedSimplexMeasure]:
    """Limit of the rescaled volume forms: one normalized-Lebesgue measure per
    top-dimensional essential face, with relative mass m_J / sum(m_J).

    Masses come from ``m.masses`` (keyed by face); faces without a mass fall
    back to ``default_mass`` if given, otherwise an error names them.
    """
    ess = essential_complex(m)
    dc = dual_complex(m)
    given = m.masses or {}
    missing = [J for J in ess.top_faces if J not in given]
    if missing and default_mass is None:
        names = ["{" + ",".join(sorted(J)) + "}" for J in missing]
        raise ValueError(f"missing masses for essential faces: {', '.join(names)}")
    raw = {
        J: float(given.get(J, default_mass if default_mass is not None else math.nan))
        for J in ess.top_faces
    }
    if any(v <= 0 or not math.isfinite(v) for v in raw.values()):
        raise ValueError("face masses must be positive finite numbers")
    total = sum(raw.values())
    return [
        WeightedSimplexMeasure(dc.simplices[J], raw[J] / total)
        for J in ess.top_faces
    ]
