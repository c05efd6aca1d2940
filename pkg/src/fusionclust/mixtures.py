"""Weighted 1-d mixture models: densities, CDFs, truncated means, sampling.

Supported component families: normal, location-shifted Student-t, Laplace,
beta, and chi-square.  Gaussian mixtures get closed-form partial first
moments (hence exact truncated means); the other families fall back to
adaptive quadrature.  Everything is deterministic given an explicit seed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats
from scipy.optimize import brentq
from scipy.special import ndtr

__all__ = [
    "Component",
    "Normal",
    "StudentT",
    "Laplace",
    "Beta",
    "ChiSquare",
    "MixtureModel",
    "parse_mixture",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Component:
    """Base class for mixture components; subclasses wrap scipy distributions."""

    def dist(self):
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        return self.dist().support()

    @property
    def has_finite_mean(self) -> bool:
        return True

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Normal(Component):
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError("sd must be positive")

    def dist(self):
        return stats.norm(self.mean, self.sd)

    def draw(self, rng, size):
        return rng.normal(self.mean, self.sd, size)


@dataclass(frozen=True)
class StudentT(Component):
    """Student-t with a location shift; df=1 is a Cauchy centered at location."""

    df: float = 1.0
    location: float = 0.0

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError("df must be positive")

    def dist(self):
        return stats.t(self.df, loc=self.location)

    @property
    def has_finite_mean(self) -> bool:
        return self.df > 1

    def draw(self, rng, size):
        return self.location + rng.standard_t(self.df, size)


@dataclass(frozen=True)
class Laplace(Component):
    location: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def dist(self):
        return stats.laplace(self.location, 1.0 / self.rate)

    def draw(self, rng, size):
        return rng.laplace(self.location, 1.0 / self.rate, size)


@dataclass(frozen=True)
class Beta(Component):
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("shape parameters must be positive")

    def dist(self):
        return stats.beta(self.a, self.b)

    def draw(self, rng, size):
        return rng.beta(self.a, self.b, size)


@dataclass(frozen=True)
class ChiSquare(Component):
    df: float = 1.0

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError("df must be positive")

    def dist(self):
        return stats.chi2(self.df)

    def draw(self, rng, size):
        return rng.chisquare(self.df, size)


class MixtureModel:
    """Nonempty weighted mixture of 1-d components.

    Weights must be positive and sum to one (within 1e-12).  Instances are
    immutable and safe to share; sampling never touches shared state.
    """

    def __init__(self, components, weights):
        components = tuple(components)
        weights = np.asarray(weights, dtype=float)
        if len(components) == 0:
            raise ValueError("mixture needs at least one component")
        if weights.shape != (len(components),):
            raise ValueError("one weight per component required")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        for c in components:
            if not isinstance(c, Component):
                raise TypeError(f"not a mixture component: {c!r}")
        self.components = components
        self.weights = weights
        self.weights.flags.writeable = False
        self._dists = tuple(c.dist() for c in components)
        self._gauss = None
        if all(isinstance(c, Normal) for c in components):
            self._gauss = (
                np.array([c.mean for c in components]),
                np.array([c.sd for c in components]),
                weights.copy(),
            )

    # -- basic structure -------------------------------------------------

    @property
    def is_gaussian(self) -> bool:
        return self._gauss is not None

    @property
    def has_finite_mean(self) -> bool:
        return all(c.has_finite_mean for c in self.components)

    def __repr__(self):
        terms = ", ".join(f"{w:g}*{c!r}" for w, c in zip(self.weights, self.components))
        return f"MixtureModel({terms})"

    def support(self) -> tuple[float, float]:
        los, his = zip(*(c.support for c in self.components))
        return min(los), max(his)

    # -- densities and probabilities -------------------------------------

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for w, d in zip(self.weights, self._dists):
            out += w * d.pdf(x)
        return out if out.shape else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for w, d in zip(self.weights, self._dists):
            out += w * d.cdf(x)
        return out if out.shape else float(out)

    def prob(self, lo, hi):
        """Probability of the interval (lo, hi); accurate deep in the tails."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self._gauss is not None:
            mu, sd, w = self._gauss
            zl = (lo[..., None] - mu) / sd
            zr = (hi[..., None] - mu) / sd
            p = np.where(zl > 0, ndtr(-zl) - ndtr(-zr), ndtr(zr) - ndtr(zl))
            out = np.sum(w * p, axis=-1)
        else:
            out = np.zeros(np.broadcast(lo, hi).shape)
            for w, d in zip(self.weights, self._dists):
                out = out + w * np.where(
                    d.cdf(lo) > 0.5, d.sf(lo) - d.sf(hi), d.cdf(hi) - d.cdf(lo)
                )
        return out if np.ndim(out) else float(out)

    def quantile(self, q: float) -> float:
        """Mixture quantile by bracketed root search on the CDF."""
        if not 0.0 < q < 1.0:
            raise ValueError("q must lie strictly between 0 and 1")
        los = [d.ppf(q) for d in self._dists]
        his = [d.isf(1.0 - q) if q > 0.5 else d.ppf(q) for d in self._dists]
        lo, hi = min(los + his), max(los + his)
        if lo == hi:
            return float(lo)
        return float(brentq(lambda x: self.cdf(x) - q, lo, hi, xtol=1e-12, rtol=1e-14))

    def tail_quantiles(self, mass: float) -> tuple[float, float]:
        """Locations cutting off ``mass`` probability in each tail.

        Computed per component (conservatively, from the per-component tail
        allowance mass / weight) so that extremely small masses stay accurate.
        """
        los, his = [], []
        for w, d in zip(self.weights, self._dists):
            q = min(mass / w, 0.25)
            los.append(d.ppf(q))
            his.append(d.isf(q))
        return min(los), max(his)

    # -- moments ----------------------------------------------------------

    def first_moment(self, lo: float, hi: float) -> float:
        """Integral of x * f(x) over (lo, hi).

        Closed form for Gaussian mixtures; adaptive quadrature (absolute
        tolerance 1e-10) otherwise.  Heavy-tailed components without a finite
        mean require finite integration limits.
        """
        if self._gauss is not None:
            return float(self._gauss_xint(np.float64(lo), np.float64(hi)))
        total = 0.0
        for w, c, d in zip(self.weights, self.components, self._dists):
            slo, shi = c.support
            a, b = max(lo, slo), min(hi, shi)
            if a >= b:
                continue
            if not c.has_finite_mean and (math.isinf(a) or math.isinf(b)):
                raise ValueError(
                    "infinite-limit first moment undefined for heavy-tailed component"
                )
            val, _ = integrate.quad(lambda x, d=d: x * d.pdf(x), a, b,
                                    epsabs=1e-10, epsrel=1e-12, limit=200)
            total += w * val
        return total

    def _gauss_xint(self, lo, hi):
        mu, sd, w = self._gauss
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        zl = (lo[..., None] - mu) / sd
        zr = (hi[..., None] - mu) / sd
        p = np.where(zl > 0, ndtr(-zl) - ndtr(-zr), ndtr(zr) - ndtr(zl))
        phl = np.where(np.isfinite(zl), np.exp(-0.5 * zl * zl) / _SQRT2PI, 0.0)
        phr = np.where(np.isfinite(zr), np.exp(-0.5 * zr * zr) / _SQRT2PI, 0.0)
        return np.sum(w * (mu * p - sd * (phr - phl)), axis=-1)

    def truncated_mean(self, lo: float, hi: float) -> float:
        """Conditional mean of the mixture restricted to (lo, hi)."""
        if not lo < hi:
            raise ValueError("need lo < hi")
        p = self.prob(lo, hi)
        if not p > 0.0:
            raise ValueError(f"interval ({lo}, {hi}) carries no probability")
        return self.first_moment(lo, hi) / p

    # -- sampling ----------------------------------------------------------

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n iid draws; identical (n, seed) always yields identical output."""
        if n < 1:
            raise ValueError("n must be positive")
        rng = np.random.default_rng(seed)
        cum = np.cumsum(self.weights)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(n), side="right")
        out = np.empty(n)
        for i, comp in enumerate(self.components):
            mask = idx == i
            k = int(mask.sum())
            if k:
                out[mask] = comp.draw(rng, k)
        return out

    # -- shape -------------------------------------------------------------

    def find_local_extrema(self, *, grid_size: int = 4096,
                           quantile_range: tuple[float, float] = (0.0005, 0.9995),
                           tol: float = 1e-8) -> list[tuple[float, str]]:
        """Interior stationary points of the density, as (location, kind) pairs.

        The density is scanned on ``grid_size`` points spanning the given
        quantile range; sign changes of the finite-difference slope are then
        sharpened by bisection to ``tol``.  Kinds alternate between "mode"
        and "min" in ascending location order.  Monotone densities yield an
        empty list.
        """
        lo = self.quantile(quantile_range[0])
        hi = self.quantile(quantile_range[1])
        slo, shi = self.support()
        lo, hi = max(lo, slo), min(hi, shi)
        grid = np.linspace(lo, hi, grid_size)
        f = self.pdf(grid)
        slope_sign = np.sign(np.diff(f))
        extrema = []
        nz = np.nonzero(slope_sign)[0]
        h = (hi - lo) / (grid_size * 8)

        def dslope(x):
            return self.pdf(x + h) - self.pdf(x - h)

        for i, j in zip(nz[:-1], nz[1:]):
            if slope_sign[i] == slope_sign[j]:
                continue
            entering = slope_sign[i]  # slope sign left of the extremum
            kind = "mode" if entering > 0 else "min"
            a, b = grid[i], grid[j + 1]
            for _ in range(80):
                if b - a <= tol:
                    break
                mid = 0.5 * (a + b)
                fm = entering * dslope(mid)
                if fm > 0.0:
                    a = mid
                elif fm < 0.0:
                    b = mid
                else:  # numerically stationary
                    a = b = mid
            extrema.append((0.5 * (a + b), kind))
        return extrema

    def density_minima(self) -> list[float]:
        """Locations of interior local minima of the density."""
        return [x for x, kind in self.find_local_extrema() if kind == "min"]

    def density_modes(self) -> list[float]:
        """Locations of interior local maxima of the density."""
        return [x for x, kind in self.find_local_extrema() if kind == "mode"]


# ---------------------------------------------------------------------------
# mixture string mini-format
# ---------------------------------------------------------------------------

_KINDS = {
    "normal": (Normal, (1, 2)),
    "norm": (Normal, (1, 2)),
    "n": (Normal, (1, 2)),
    "student_t": (StudentT, (1, 2)),
    "t": (StudentT, (1, 2)),
    "laplace": (Laplace, (1, 2)),
    "dexp": (Laplace, (1, 2)),
    "beta": (Beta, (2,)),
    "chi_square": (ChiSquare, (1,)),
    "chisq": (ChiSquare, (1,)),
}

_TERM_RE = re.compile(
    r"^(?:(?P<weight>[0-9.eE+-]+)\*)?(?P<kind>[a-zA-Z_]+)\((?P<args>[^()]*)\)$"
)


def parse_mixture(text: str) -> MixtureModel:
    """Parse a mixture description like ``"0.3*normal(-4,1)+0.7*normal(4,1)"``.

    Terms are joined by ``+``; each is ``weight*kind(args)`` with the weight
    optional.  When no term carries a weight the components are weighted
    equally.  Whitespace is ignored.  Kinds: normal(mean, sd=1),
    student_t(df, location=0) (alias t), laplace(location, rate=1)
    (alias dexp), beta(a, b), chi_square(df) (alias chisq).
    """
    compact = re.sub(r"\s+", "", text)
    if not compact:
        raise ValueError("empty mixture specification")
    # split on '+' not inside parentheses and not part of an exponent sign
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(compact):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0 and i > start and compact[i - 1] not in "eE":
            terms.append(compact[start:i])
            start = i + 1
    terms.append(compact[start:])

    comps, weights = [], []
    for term in terms:
        m = _TERM_RE.match(term)
        if m is None:
            raise ValueError(f"cannot parse mixture term {term!r}")
        kind = m.group("kind").lower()
        if kind not in _KINDS:
            raise ValueError(f"unknown component kind {m.group('kind')!r}")
        cls, arities = _KINDS[kind]
        raw_args = m.group("args")
        try:
            args = [float(a) for a in raw_args.split(",")] if raw_args else []
        except ValueError:
            raise ValueError(f"non-numeric parameter in term {term!r}") from None
        if len(args) not in arities:
            raise ValueError(f"{kind} takes {arities} parameters, got {len(args)}")
        comps.append(cls(*args))
        w = m.group("weight")
        weights.append(float(w) if w is not None else None)

    given = [w for w in weights if w is not None]
    if not given:
        weights = [1.0 / len(comps)] * len(comps)
    elif len(given) != len(comps):
        raise ValueError("either weight every term or none of them")
    return MixtureModel(comps, weights)


def parse_mixture_columns(text: str) -> list[MixtureModel]:
    """Parse a '|'-separated product of per-dimension mixtures."""
    return [parse_mixture(part) for part in text.split("|")]
