"""Coefficient profiles a(x): step and sampled representations.

Provides admissibility checks (lower bound, total variation), mollification by
a fixed compactly supported bump, monotone change-of-variable construction,
and seeded generators for fixed-variation step families.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator


@dataclass(frozen=True)
class StepCoefficient:
    """Piecewise-constant coefficient.

    values[i] holds on [breakpoints[i-1], breakpoints[i]); values[0] extends to
    -inf and values[-1] to +inf, so len(values) == len(breakpoints) + 1.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if bp.size + 1 != vals.size:
            raise ValueError("need len(values) == len(breakpoints) + 1")
        if bp.size > 1 and not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(vals <= 0):
            raise ValueError("coefficient values must be positive")

    @property
    def n_jumps(self) -> int:
        return int(self.breakpoints.size)

    def __call__(self, x):
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=float), side="right")
        return self.values[idx]

    def inverse_integral(self, xl: float, xr: float) -> float:
        """Exact integral of 1/a over [xl, xr]."""
        if xr < xl:
            raise ValueError("empty interval")
        edges = np.concatenate(([xl], self.breakpoints[(self.breakpoints > xl) & (self.breakpoints < xr)], [xr]))
        mids = 0.5 * (edges[:-1] + edges[1:])
        return float(np.sum(np.diff(edges) / self(mids)))

    def harmonic_cell_average(self, xl: float, xr: float) -> float:
        """(xr-xl) / int_[xl,xr] (1/a): the flux-exact cell value."""
        return (xr - xl) / self.inverse_integral(xl, xr)


@dataclass(frozen=True)
class SampledCoefficient:
    """Coefficient on a uniform grid over [x0, x1], endpoints included."""

    x0: float
    x1: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if s.size < 2:
            raise ValueError("need at least 2 samples")
        if not self.x1 > self.x0:
            raise ValueError("need x1 > x0")
        if np.any(s <= 0):
            raise ValueError("coefficient samples must be positive")

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def grid_step(self) -> float:
        return (self.x1 - self.x0) / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.n)

    def __call__(self, x):
        # constant extension past the sampling window
        return np.interp(np.asarray(x, dtype=float), self.grid, self.samples)


@dataclass(frozen=True)
class AdmissibilityReport:
    m: float            # observed lower bound
    M: float            # observed essential sup
    tv: float           # total variation
    bv_norm: float      # M + tv
    admissible: bool


def total_variation(c) -> float:
    """Sum of absolute increments; exact for steps, grid-discrete for samples."""
    if isinstance(c, StepCoefficient):
        return float(np.sum(np.abs(np.diff(c.values))))
    if isinstance(c, SampledCoefficient):
        return float(np.sum(np.abs(np.diff(c.samples))))
    raise TypeError(f"unsupported coefficient type {type(c)}")


def check_admissible(c, m: float) -> AdmissibilityReport:
    vals = c.values if isinstance(c, StepCoefficient) else c.samples
    lo = float(np.min(vals))
    hi = float(np.max(vals))
    tv = total_variation(c)
    ok = bool(lo >= m) and np.isfinite(tv)
    return AdmissibilityReport(m=lo, M=hi, tv=tv, bv_norm=hi + tv, admissible=ok)


# --- mollification ------------------------------------------------------

_BUMP_TABLE_N = 1 << 15


@lru_cache(maxsize=1)
def _bump_cdf_table():
    """CDF of the unit bump rho(x) ~ exp(-1/(1-x^2)) on (-1, 1), unit mass."""
    x = np.linspace(-1.0, 1.0, _BUMP_TABLE_N + 1)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        rho = np.where(np.abs(x) < 1.0, np.exp(-1.0 / np.maximum(1.0 - x * x, 1e-300)), 0.0)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(x))))
    cdf /= cdf[-1]
    return x, cdf


def mollifier_cdf(u: np.ndarray) -> np.ndarray:
    """int_{-inf}^{u} rho, for the fixed unit-width bump."""
    x, cdf = _bump_cdf_table()
    return np.interp(u, x, cdf, left=0.0, right=1.0)


def mollify(c: StepCoefficient, epsilon: float, n: int | None = None,
            margin: float = 2.0) -> SampledCoefficient:
    """Samples of the convolution rho_eps * a.

    Evaluation is by the exact formula a0 + sum_i (jump_i) * CDF((x-x_i)/eps),
    so bounds and variation of the profile are inherited from the CDF table.
    """
    if epsilon <= 0:
        raise ValueError("mollifier width must be positive")
    if c.n_jumps == 0:
        lo, hi = -1.0, 1.0
    else:
        lo = float(c.breakpoints[0]) - margin * epsilon
        hi = float(c.breakpoints[-1]) + margin * epsilon
    if n is None:
        n = int(min(1 << 20, max(1024, round(16 * (hi - lo) / epsilon))))
    grid = np.linspace(lo, hi, n)
    h = grid[1] - grid[0]
    if epsilon < h:
        raise ValueError(f"mollifier width {epsilon} under-resolved by grid step {h}")
    vals = np.full(n, c.values[0])
    for xi, jump in zip(c.breakpoints, np.diff(c.values)):
        vals = vals + jump * mollifier_cdf((grid - xi) / epsilon)
    return SampledCoefficient(x0=lo, x1=hi, samples=vals)


# --- change of variables -------------------------------------------------

@dataclass(frozen=True)
class Diffeomorphism:
    """Monotone map x = phi(y) with y = phi^{-1}(x) = int_0^x omega.

    forward_x/forward_y sample y(x); inverse_y/inverse_x sample x(y) on a
    uniform y grid. jacobian_bounds bound dx/dy = 1/omega.
    """

    forward_x: np.ndarray
    forward_y: np.ndarray
    inverse_y: np.ndarray
    inverse_x: np.ndarray
    jacobian_bounds: tuple[float, float]

    def phi(self, y):
        """x = phi(y)."""
        return PchipInterpolator(self.inverse_y, self.inverse_x)(y)

    def phi_inverse(self, x):
        """y = phi^{-1}(x)."""
        return PchipInterpolator(self.forward_x, self.forward_y)(x)

    def roundtrip_error(self) -> float:
        return float(np.max(np.abs(self.phi(self.phi_inverse(self.forward_x)) - self.forward_x)))


def build_diffeomorphism(omega: SampledCoefficient) -> Diffeomorphism:
    """Integrate dy/dx = omega(x) and invert by monotone interpolation.

    y is anchored at 0 where x = 0 when the grid contains it, else at the left
    end of the grid.
    """
    w = omega.samples
    if np.any(w <= 0):
        raise ValueError("omega must be positive")
    x = omega.grid
    h = omega.grid_step
    y = np.concatenate(([0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * h)))
    if omega.x0 <= 0.0 <= omega.x1:
        y = y - np.interp(0.0, x, y)
    yg = np.linspace(y[0], y[-1], omega.n)
    xg = PchipInterpolator(y, x)(yg)
    jac = (1.0 / float(np.max(w)), 1.0 / float(np.min(w)))
    return Diffeomorphism(forward_x=x, forward_y=y, inverse_y=yg, inverse_x=xg,
                          jacobian_bounds=jac)


# --- families ------------------------------------------------------------

def step_family_fixed_bv(n_jumps: int, bv_target: float, m: float, seed: int,
                         span: float = 2.0) -> StepCoefficient:
    """Seeded step coefficient with exactly n_jumps jumps and TV == bv_target.

    Jump magnitudes are drawn uniformly and rescaled so they sum to bv_target
    exactly; signs alternate so the profile oscillates, and the whole path is
    shifted so its minimum sits at m.
    """
    if n_jumps < 1:
        raise ValueError("need at least one jump")
    if bv_target <= 0:
        raise ValueError("bv_target must be positive")
    rng = np.random.default_rng(seed)
    pos = np.sort(rng.uniform(-span / 2, span / 2, n_jumps))
    while np.any(np.diff(pos) <= 1e-12):           # fuse-proofing, vanishingly rare
        pos = np.sort(rng.uniform(-span / 2, span / 2, n_jumps))
    mag = rng.uniform(0.5, 1.5, n_jumps)
    mag *= bv_target / mag.sum()
    signs = (-1.0) ** np.arange(n_jumps)
    path = np.concatenate(([0.0], np.cumsum(signs * mag)))
    path += m - path.min()
    return StepCoefficient(breakpoints=pos, values=path)


# --- serialization -------------------------------------------------------

def coefficient_to_json(c, m: float | None = None) -> dict:
    if isinstance(c, StepCoefficient):
        out = {"type": "step", "breakpoints": c.breakpoints.tolist(),
               "values": c.values.tolist()}
    elif isinstance(c, SampledCoefficient):
        out = {"type": "sampled", "grid": {"x0": c.x0, "x1": c.x1, "n": c.n},
               "values": c.samples.tolist()}
    else:
        raise TypeError(f"unsupported coefficient type {type(c)}")
    if m is not None:
        out["m"] = m
    return out


def coefficient_from_json(obj: dict):
    kind = obj["type"]
    if kind == "step":
        return StepCoefficient(breakpoints=np.array(obj["breakpoints"], dtype=float),
                               values=np.array(obj["values"], dtype=float))
    if kind == "sampled":
        g = obj["grid"]
        return SampledCoefficient(x0=float(g["x0"]), x1=float(g["x1"]),
                                  samples=np.array(obj["values"], dtype=float))
    raise ValueError(f"unknown coefficient type {kind!r}")


def load_coefficient(path):
    with open(path) as fh:
        return coefficient_from_json(json.load(fh))


def save_coefficient(path, c, m: float | None = None):
    with open(path, "w") as fh:
        json.dump(coefficient_to_json(c, m=m), fh, indent=1)
