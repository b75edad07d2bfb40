"""Grid functions and space-time fields with their file formats."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a uniform grid over [x0, x1], endpoints included."""

    x0: float
    x1: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", s)
        if s.size < 2:
            raise ValueError("need at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        if not self.x1 > self.x0:
            raise ValueError("need x1 > x0")

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def h(self) -> float:
        return (self.x1 - self.x0) / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.n)

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.x0, self.x1, np.asarray(samples, dtype=complex))

    def norm_lp(self, p: float) -> float:
        """Trapezoid L^p norm; p = inf is the grid max."""
        a = np.abs(self.samples)
        if np.isinf(p):
            return float(a.max())
        w = np.full(self.n, self.h)
        w[0] = w[-1] = self.h / 2
        return float(np.sum(w * a ** p) ** (1.0 / p))

    def norm_l2(self) -> float:
        return self.norm_lp(2)

    def inner(self, other: "GridFunction") -> complex:
        """Trapezoid <f, g> = int f conj(g)."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = self.h / 2
        return complex(np.sum(w * self.samples * np.conj(other.samples)))


def gaussian_profile(x0: float, x1: float, n: int, center: float = 0.0,
                     width: float = 1.0, freq: float = 0.0) -> GridFunction:
    """L^2-normalized Gaussian packet exp(-(x-c)^2/(2w^2)) e^{i freq x}."""
    x = np.linspace(x0, x1, n)
    u = np.exp(-((x - center) ** 2) / (2 * width ** 2)).astype(complex)
    u *= np.exp(1j * freq * x)
    g = GridFunction(x0, x1, u)
    return g.with_samples(g.samples / g.norm_l2())


def bump_profile(x0: float, x1: float, n: int, center: float = 0.0,
                 width: float = 0.1, mass: float = 1.0) -> GridFunction:
    """Smooth compactly supported bump with unit (or given) L^1 mass."""
    x = np.linspace(x0, x1, n)
    u = (x - center) / width
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        v = np.where(np.abs(u) < 1.0, np.exp(-1.0 / np.maximum(1.0 - u * u, 1e-300)), 0.0)
    g = GridFunction(x0, x1, v.astype(complex))
    return g.with_samples(g.samples * (mass / g.norm_lp(1)))


@dataclass(frozen=True)
class SpaceTimeField:
    """values[i, k] = u(x_i, t_k) on uniform grids."""

    x0: float
    dx: float
    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise ValueError("values must be 2-D (n_x, n_t)")

    @property
    def n_x(self) -> int:
        return self.values.shape[0]

    @property
    def n_t(self) -> int:
        return self.values.shape[1]

    @property
    def x_grid(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n_x)

    @property
    def t_grid(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_t)

    def slice_t(self, k: int) -> GridFunction:
        return GridFunction(self.x0, self.x0 + self.dx * (self.n_x - 1), self.values[:, k])


def save_field(path_prefix: str, field: SpaceTimeField) -> None:
    """Flat binary of doubles (re, im interleaved, C order) + JSON sidecar."""
    raw = np.empty(field.values.size * 2)
    raw[0::2] = field.values.real.ravel()
    raw[1::2] = field.values.imag.ravel()
    raw.tofile(path_prefix + ".bin")
    meta = {"n_x": field.n_x, "n_t": field.n_t, "x0": field.x0, "dx": field.dx,
            "t0": field.t0, "dt": field.dt}
    with open(path_prefix + ".json", "w") as fh:
        json.dump(meta, fh, indent=1)


def load_field(path_prefix: str) -> SpaceTimeField:
    with open(path_prefix + ".json") as fh:
        meta = json.load(fh)
    raw = np.fromfile(path_prefix + ".bin")
    vals = (raw[0::2] + 1j * raw[1::2]).reshape(meta["n_x"], meta["n_t"])
    return SpaceTimeField(x0=meta["x0"], dx=meta["dx"], t0=meta["t0"], dt=meta["dt"],
                          values=vals)
