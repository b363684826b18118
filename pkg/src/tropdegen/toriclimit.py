"""The local toric degeneration {t = prod z_i^{b_i}} with weighted volume forms.

This is the desk-scale engine behind the limit-measure statements: exact
pushforward identities for the invariant volume form, Laplace-type integrals
over the simplex, total-mass asymptotics along rays t -> 0, and Monte-Carlo
verification that the rescaled weighted measure pushes forward to normalized
Lebesgue measure on the essential face.

Conventions.  The fiber has dimension p = |J| - 1; the rescaled log image of
the fiber is the simplex {w >= 0, b.w = 1}.  The invariant volume form is
normalized so that its pushforward under the rescaled log map is exactly
(2pi)^p eps^{-p} times the hyperplane Lebesgue measure (per unit Haar mass
on the fibers); concretely |dlog z|^2 integrates to d(log|z|) d(arg z).
With weights |z_i|^{2 a_i} the total mass over the closed unit polydisc is

    M(t) = (2pi)^p eps^{-p} * I(eps),
    I(eps) = integral over the simplex of exp(-2 a.w / eps) sigma_H(dw),

which behaves like c |t|^{2 kappa} eps^{-d} with kappa = min a_i/b_i and d
the dimension of the face where the minimum is attained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .amoeba import ScaleFactor
from .polyhedral import (
    WeightedSimplex,
    as_fraction,
    frac_to_str,
    sample_uniform,
    sigma_H_volume,
)

Density = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ToricDegeneration:
    """Weights (b, a) of the local model {t = prod z_i^{b_i}} on the unit polydisc."""

    b: tuple[int, ...]
    a: tuple[Fraction, ...]
    density: Density | None = None

    @staticmethod
    def make(b: Sequence[int], a: Sequence, density: Density | None = None) -> "ToricDegeneration":
        b = tuple(int(x) for x in b)
        if not b or any(x < 1 for x in b):
            raise ValueError("multiplicities must be positive integers")
        a = tuple(as_fraction(x) for x in a)
        if len(a) != len(b):
            raise ValueError("a and b must have the same length")
        if any(x < 0 for x in a):
            raise ValueError("weights must be nonnegative (normalize kappa first)")
        return ToricDegeneration(b, a, density)

    @property
    def p(self) -> int:
        return len(self.b) - 1

    @property
    def n_components(self) -> int:
        return math.gcd(*self.b)

    def kappa_values(self) -> tuple[Fraction, tuple[Fraction, ...]]:
        per = tuple(ai / bi for ai, bi in zip(self.a, self.b))
        return min(per), per

    def essential_indices(self) -> list[int]:
        k, per = self.kappa_values()
        return [i for i, r in enumerate(per) if r == k]

    def simplex(self) -> WeightedSimplex:
        return WeightedSimplex(tuple(str(i) for i in range(len(self.b))), self.b)


def _require_positive_real(s: ScaleFactor) -> float:
    t = complex(s.t)
    if t.imag != 0 or t.real <= 0:
        raise ValueError("fiber sampling assumes t real and positive")
    return t.real


def sample_fiber(
    d: ToricDegeneration, s: ScaleFactor, w, seed: int, count: int
) -> np.ndarray:
    """Haar samples of the rescaled-log fiber over w: z_i = t^{w_i} e^{i theta_i}
    with theta uniform on {sum b_i theta_i = 0 mod 2pi} (all components)."""
    t = _require_positive_real(s)
    k = len(d.b)
    w = np.asarray([float(x) for x in w], dtype=float)
    if w.shape != (k,):
        raise ValueError("w must have one coordinate per index")
    if np.any(w < -1e-12) or abs(float(np.dot(w, d.b)) - 1.0) > 1e-9:
        raise ValueError("w must lie in the simplex {w >= 0, b.w = 1}")
    g = np.random.Generator(np.random.PCG64(seed))
    theta = np.empty((count, k))
    if k > 1:
        theta[:, 1:] = g.uniform(0.0, 2.0 * np.pi, size=(count, k - 1))
    branch = g.integers(0, d.b[0], size=count)
    theta[:, 0] = (
        2.0 * np.pi * branch - theta[:, 1:] @ np.asarray(d.b[1:], dtype=float)
    ) / d.b[0]
    radii = np.exp(w * math.log(t))
    return radii[None, :] * np.exp(1j * theta)


# ---------------------------------------------------------------------------
# exact pushforward identity
# ---------------------------------------------------------------------------

def _fiber_point(d: ToricDegeneration, logt: float, u: np.ndarray) -> np.ndarray:
    """Map the free parameters u = (w_1..w_p, theta_1..theta_p) to z (branch 0)."""
    p = d.p
    b = np.asarray(d.b, dtype=float)
    w = np.empty(p + 1)
    w[1:] = u[:p]
    w[0] = (1.0 - float(np.dot(b[1:], u[:p]))) / b[0]
    theta = np.empty(p + 1)
    theta[1:] = u[p:]
    theta[0] = -float(np.dot(b[1:], u[p:])) / b[0]
    return np.exp(w * logt + 1j * theta)


def verify_omt(
    d: ToricDegeneration, s: ScaleFactor, trials: int = 100, seed: int = 0
) -> float:
    """Max relative deviation of the parametrization Jacobian from the exact
    pushforward constant (2pi)^p (per unit Haar mass, co-area normalization).

    The invariant p-form is reconstructed by finite differences of the actual
    coordinate map, so the deviation measures floating error only; anything
    much above 1e-10 indicates a bug in the sampling map or a normalization
    mismatch.
    """
    t = _require_positive_real(s)
    p = d.p
    if p == 0:
        return 0.0
    logt = math.log(t)
    simplex = d.simplex()
    ws = sample_uniform(simplex, seed, trials)
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    thetas = rng.uniform(0.0, 2.0 * np.pi, size=(trials, p))
    j0 = p  # index omitted in the volume-form elimination
    rows = [i for i in range(p + 1) if i != j0]
    h = 2.0**-20
    worst = 0.0
    for q in range(trials):
        u0 = np.concatenate([ws[q, 1:], thetas[q]])
        M = np.empty((p, 2 * p), dtype=complex)
        for col in range(2 * p):
            up = u0.copy()
            um = u0.copy()
            up[col] += h
            um[col] -= h
            zp = _fiber_point(d, logt, up)
            zm = _fiber_point(d, logt, um)
            dlog = np.log(zp / zm) / (2.0 * h)
            M[:, col] = dlog[rows]
        big = np.vstack([M, np.conj(M)])
        det = abs(np.linalg.det(big))
        ratio = (s.eps**p) * (2.0**-p) * (d.b[0] / d.b[j0]) ** 2 * det
        worst = max(worst, abs(ratio - 1.0))
    return worst


# ---------------------------------------------------------------------------
# Laplace integrals over the simplex
# ---------------------------------------------------------------------------

def _std_simplex_exp(svals: np.ndarray) -> float:
    """integral over the standard simplex {l >= 0, sum l = 1} of exp(-s.l),
    with respect to Lebesgue measure in the last p coordinates."""
    if len(svals) == 1:
        return math.exp(-svals[0])
    pdim = len(svals) - 1

    def integrand(u: float) -> float:
        return (
            math.exp(-svals[-1] * u)
            * (1.0 - u) ** (pdim - 1)
            * _std_simplex_exp((1.0 - u) * svals[:-1])
        )

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def laplace_integral(d: ToricDegeneration, eps: float) -> float:
    """I(eps) = integral over {w >= 0, b.w = 1} of exp(-2 a.w / eps) sigma_H(dw).

    In barycentric coordinates this is (1/prod b) times the exponential
    integral over the standard simplex with node values 2 (a_i/b_i) / eps;
    for at most two distinct node values a confluent-hypergeometric closed
    form is used, otherwise recursive adaptive quadrature.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    _, per = d.kappa_values()
    s = np.array([2.0 * float(r) / eps for r in per])
    pdim = d.p
    prod_b = 1
    for x in d.b:
        prod_b *= x
    distinct = sorted(set(per))
    if len(distinct) == 1:
        g = math.exp(-s[0]) / math.factorial(pdim)
    elif len(distinct) == 2:
        x = 2.0 * float(distinct[0]) / eps
        y = 2.0 * float(distinct[1]) / eps
        m1 = sum(1 for r in per if r == distinct[1])
        g = math.exp(-x) * float(special.hyp1f1(m1, pdim + 1, x - y)) / math.factorial(pdim)
    else:
        g = _std_simplex_exp(s)
    return g / prod_b


def total_mass(d: ToricDegeneration, s: ScaleFactor, mc_samples: int = 0, seed: int = 0) -> float:
    """Mass of the weighted measure over the unit polydisc at parameter t."""
    m = (2.0 * math.pi) ** d.p * s.eps ** (-d.p) * laplace_integral(d, s.eps)
    if d.density is not None:
        if mc_samples <= 0:
            raise ValueError("density != 1 requires mc_samples > 0")
        est = _weighted_density_mean(d, s, mc_samples, seed)
        m *= est
    return m


def _weighted_density_mean(d: ToricDegeneration, s: ScaleFactor, count: int, seed: int) -> float:
    simplex = d.simplex()
    ws = sample_uniform(simplex, seed, count)
    a = np.array([float(x) for x in d.a])
    logw = -2.0 * (ws @ a) / s.eps
    v = np.exp(logw - logw.max())
    rng = np.random.Generator(np.random.PCG64(seed + 7))
    theta = _haar_angles(d, rng, count)
    z = np.exp(ws * math.log(_require_positive_real(s)) + 1j * theta)
    rho = np.asarray(d.density(z), dtype=float)
    return float(np.sum(v * rho) / np.sum(v))


def _haar_angles(d: ToricDegeneration, rng: np.random.Generator, count: int) -> np.ndarray:
    k = len(d.b)
    theta = np.empty((count, k))
    if k > 1:
        theta[:, 1:] = rng.uniform(0.0, 2.0 * np.pi, size=(count, k - 1))
    branch = rng.integers(0, d.b[0], size=count)
    theta[:, 0] = (
        2.0 * np.pi * branch - theta[:, 1:] @ np.asarray(d.b[1:], dtype=float)
    ) / d.b[0]
    return theta


# ---------------------------------------------------------------------------
# mass asymptotics along a ray
# ---------------------------------------------------------------------------

@dataclass
class MassFit:
    kappa_fit: Fraction
    d_fit: int
    c_fit: float
    kappa_predicted: Fraction
    d_predicted: int
    kappa_agrees: bool
    d_agrees: bool
    table: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "kappa_fit": frac_to_str(self.kappa_fit),
            "d_fit": self.d_fit,
            "c_fit": self.c_fit,
            "kappa_predicted": frac_to_str(self.kappa_predicted),
            "d_predicted": self.d_predicted,
            "kappa_agrees": self.kappa_agrees,
            "d_agrees": self.d_agrees,
            "table": self.table,
        }


def mass_asymptotics(
    d: ToricDegeneration,
    ts: Sequence[float],
    mc_samples: int = 0,
    seed: int = 0,
) -> MassFit:
    """Fit M(t) ~ c |t|^{2 kappa} eps^{-d} over a ray of parameters.

    Candidate kappa values are the per-index ratios a_i/b_i; candidate d are
    the integers 0..p.  The pair minimizing the variance of
    log M + 2 kappa/eps + d log eps across the ray wins; the predicted pair
    (min ratio, essential-face dimension) is returned alongside for the
    agreement flags.
    """
    ts = [float(t) for t in ts]
    if len(ts) < 4:
        raise ValueError("ray needs at least 4 points")
    if any(t2 >= t1 for t1, t2 in zip(ts, ts[1:])):
        raise ValueError("ray must be strictly decreasing")
    if math.log10(ts[0] / ts[-1]) < 3:
        raise ValueError("ray must span at least 3 decades")

    scales = [ScaleFactor(t) for t in ts]
    masses = [total_mass(d, s, mc_samples, seed) for s in scales]

    kap_pred, per = d.kappa_values()
    d_pred = len(d.essential_indices()) - 1
    best = None
    for kc in sorted(set(per)):
        for dc in range(d.p + 1):
            ys = [
                math.log(m) + 2.0 * float(kc) / s.eps + dc * math.log(s.eps)
                for m, s in zip(masses, scales)
            ]
            mean = sum(ys) / len(ys)
            var = sum((y - mean) ** 2 for y in ys) / len(ys)
            if best is None or var < best[0]:
                best = (var, kc, dc, math.exp(mean))
    _, kap_fit, d_fit, c_fit = best
    table = [
        {"abs_t": t, "eps": s.eps, "mass": m}
        for t, s, m in zip(ts, scales, masses)
    ]
    return MassFit(
        kappa_fit=kap_fit,
        d_fit=d_fit,
        c_fit=c_fit,
        kappa_predicted=kap_pred,
        d_predicted=d_pred,
        kappa_agrees=kap_fit == kap_pred,
        d_agrees=d_fit == d_pred,
        table=table,
    )


# ---------------------------------------------------------------------------
# pushforward of the weighted measure
# ---------------------------------------------------------------------------

@dataclass
class MomentReport:
    coordinates: list[dict]
    mass_estimate: float
    mass_exact: float
    mass_se: float
    effective_samples: float

    def to_json_dict(self) -> dict:
        return {
            "coordinates": self.coordinates,
            "mass_estimate": self.mass_estimate,
            "mass_exact": self.mass_exact,
            "mass_se": self.mass_se,
            "effective_samples": self.effective_samples,
        }


def _is_mean(values: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    """Self-normalized importance-sampling mean and its standard error."""
    wsum = float(np.sum(weights))
    mean = float(np.sum(weights * values) / wsum)
    se = math.sqrt(float(np.sum((weights * (values - mean)) ** 2))) / wsum
    return mean, se


def pushforward_limit(
    d: ToricDegeneration, s: ScaleFactor, count: int, seed: int
) -> MomentReport:
    """Moments of the rescaled-log pushforward of the weighted measure,
    compared with normalized Lebesgue measure on the essential face.

    Importance sampling: proposal = uniform measure on the simplex (and Haar
    angles when a density is present), weights exp(-2 a.w / eps) [times the
    density].  For each coordinate the report lists the estimated first and
    second moments, the exact limit moments, and Monte-Carlo standard errors.
    """
    if count < 10**4:
        raise ValueError("count must be at least 1e4")
    simplex = d.simplex()
    ws = sample_uniform(simplex, seed, count)
    a = np.array([float(x) for x in d.a])
    logw = -2.0 * (ws @ a) / s.eps
    shift = float(logw.max())
    weights = np.exp(logw - shift)
    if d.density is not None:
        rng = np.random.Generator(np.random.PCG64(seed + 7))
        theta = _haar_angles(d, rng, count)
        z = np.exp(ws * math.log(_require_positive_real(s)) + 1j * theta)
        weights = weights * np.asarray(d.density(z), dtype=float)

    ess_idx = d.essential_indices()
    k = len(ess_idx)
    rows = []
    for i in range(len(d.b)):
        exact_mean = Fraction(1, k * d.b[i]) if i in ess_idx else Fraction(0)
        exact_second = (
            Fraction(2, k * (k + 1) * d.b[i] ** 2) if i in ess_idx else Fraction(0)
        )
        m1, se1 = _is_mean(ws[:, i], weights)
        m2, se2 = _is_mean(ws[:, i] ** 2, weights)
        rows.append(
            {
                "index": i,
                "mean": m1,
                "mean_exact": float(exact_mean),
                "mean_se": se1,
                "second_moment": m2,
                "second_moment_exact": float(exact_second),
                "second_moment_se": se2,
            }
        )

    # normalizing-constant consistency: sigma_H(simplex) * E[e^{-2 a.w/eps}]
    # must match the Laplace integral within Monte-Carlo error
    vol = float(sigma_H_volume(simplex))
    raw_mean = float(np.mean(weights))
    raw_se = float(np.std(weights, ddof=1) / math.sqrt(count))
    mass_est = vol * raw_mean * math.exp(shift)
    mass_se = vol * raw_se * math.exp(shift)
    mass_exact = laplace_integral(d, s.eps) if d.density is None else mass_est
    ess_w = float(np.sum(weights) ** 2 / np.sum(weights**2))
    return MomentReport(
        coordinates=rows,
        mass_estimate=mass_est,
        mass_exact=mass_exact,
        mass_se=mass_se,
        effective_samples=ess_w,
    )
