"""Time propagators for i u_t + (a u_x)_x = 0: Crank-Nicolson stepping,
the exact flat-coefficient group, and a dense eigendecomposition oracle."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coefficients import SampledCoefficient, StepCoefficient
from .fields import GridFunction, SpaceTimeField

EIGEN_GUARD_N = 4096


@dataclass
class DivergenceOperator:
    """Symmetric PSD discretization of -(a u_x)_x on a uniform grid.

    Dirichlet grids include both endpoints with zero ghost values one cell
    outside; periodic grids exclude the right endpoint (x_i = x0 + i h,
    h = (x1 - x0)/n).
    """

    coefficient: object
    x0: float
    x1: float
    n: int
    boundary: str
    half_values: np.ndarray
    matrix: sp.csc_matrix
    _eig: tuple | None = field(default=None, repr=False)

    @property
    def h(self) -> float:
        if self.boundary == "periodic":
            return (self.x1 - self.x0) / self.n
        return (self.x1 - self.x0) / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def lambda_max_bound(self) -> float:
        return 4.0 * float(np.max(self.half_values)) / self.h ** 2

    def eigh(self):
        """Full eigendecomposition (cached); tridiagonal fast path for Dirichlet."""
        if self._eig is None:
            if self.n > EIGEN_GUARD_N:
                raise ValueError(f"dense eigendecomposition refused for n = {self.n}")
            if self.boundary == "dirichlet":
                d = self.matrix.diagonal()
                e = self.matrix.diagonal(1)
                lam, vecs = sla.eigh_tridiagonal(d.real, e.real)
            else:
                lam, vecs = sla.eigh(self.matrix.toarray().real)
            self._eig = (lam, vecs)
        return self._eig


def _half_value(a, xl: float, xr: float) -> float:
    if isinstance(a, StepCoefficient):
        return a.harmonic_cell_average(xl, xr)
    return float(a(0.5 * (xl + xr)))


def build_divergence_operator(a, x0: float, x1: float, n: int,
                              boundary: str = "dirichlet") -> DivergenceOperator:
    if boundary not in ("dirichlet", "periodic"):
        raise ValueError("boundary must be 'dirichlet' or 'periodic'")
    h = (x1 - x0) / (n if boundary == "periodic" else n - 1)
    if isinstance(a, StepCoefficient) and a.n_jumps > 1:
        inside = a.breakpoints[(a.breakpoints > x0) & (a.breakpoints < x1)]
        if inside.size > 1 and np.min(np.diff(inside)) < 4 * h:
            raise ValueError("grid does not resolve the coefficient: "
                             "smallest piece narrower than 4 cells")
    x = x0 + h * np.arange(n)
    if boundary == "periodic":
        # half_values[i] couples node i and node i+1 (mod n)
        half = np.array([_half_value(a, x[i], x[i] + h) for i in range(n)])
        main = (half + np.roll(half, 1)) / h ** 2
        mat = sp.diags([main, -half[:-1] / h ** 2, -half[:-1] / h ** 2],
                       [0, 1, -1], shape=(n, n), format="lil")
        mat[0, -1] = -half[-1] / h ** 2
        mat[-1, 0] = -half[-1] / h ** 2
        mat = mat.tocsc()
    else:
        # ghost cells one step outside carry the Dirichlet zeros
        edges = np.concatenate(([x[0] - h], x, [x[-1] + h]))
        half = np.array([_half_value(a, edges[i], edges[i + 1]) for i in range(n + 1)])
        main = (half[:-1] + half[1:]) / h ** 2
        off = -half[1:-1] / h ** 2
        mat = sp.diags([main, off, off], [0, 1, -1], shape=(n, n), format="csc")
        half = half[1:-1]
    return DivergenceOperator(coefficient=a, x0=x0, x1=x1, n=n, boundary=boundary,
                              half_values=half, matrix=mat)


@dataclass
class EvolutionRun:
    operator: DivergenceOperator
    u0: np.ndarray
    t_grid: np.ndarray
    field: SpaceTimeField
    boundary: str
    mass_drift: float

    def final(self) -> np.ndarray:
        return self.field.values[:, -1]


def _as_vector(u0, op: DivergenceOperator) -> np.ndarray:
    if isinstance(u0, GridFunction):
        if u0.n != op.n:
            raise ValueError("datum grid does not match the operator grid")
        return u0.samples.astype(complex)
    u = np.asarray(u0, dtype=complex)
    if u.size != op.n:
        raise ValueError("datum length does not match the operator grid")
    return u


def _check_uniform(t_grid: np.ndarray) -> float:
    t = np.asarray(t_grid, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two time samples")
    dts = np.diff(t)
    if not np.allclose(dts, dts[0], rtol=1e-9):
        raise ValueError("time grid must be uniform")
    return float(dts[0])


def evolve_crank_nicolson(op: DivergenceOperator, u0, t_grid,
                          source=None) -> EvolutionRun:
    """Unitary Cayley stepping of u_t = -i A u (- i f); one LU, one solve per step.

    source, when given, is a callable t -> ndarray(n) added as in
    i u_t + (a u_x)_x = f with trapezoid time averaging.
    """
    u = _as_vector(u0, op)
    t = np.asarray(t_grid, dtype=float)
    dt = _check_uniform(t)
    if dt * op.lambda_max_bound() > 10.0:
        warnings.warn("dt * lambda_max > 10: Crank-Nicolson phases are inaccurate "
                      "at the top of the spectrum", RuntimeWarning)
    eye = sp.identity(op.n, format="csc", dtype=complex)
    lhs = (eye + 0.5j * dt * op.matrix).tocsc()
    rhs = (eye - 0.5j * dt * op.matrix).tocsc()
    lu = spla.splu(lhs)
    vals = np.empty((op.n, t.size), dtype=complex)
    vals[:, 0] = u
    f_prev = source(t[0]) if source is not None else None
    for k in range(1, t.size):
        b = rhs @ u
        if source is not None:
            f_next = source(t[k])
            b = b - 0.5j * dt * (f_prev + f_next)
            f_prev = f_next
        u = lu.solve(b)
        vals[:, k] = u
    m0 = np.linalg.norm(vals[:, 0])
    drift = 0.0 if m0 == 0 else abs(np.linalg.norm(vals[:, -1]) - m0) / m0
    fld = SpaceTimeField(x0=op.x0, dx=op.h, t0=t[0], dt=dt, values=vals)
    return EvolutionRun(operator=op, u0=vals[:, 0].copy(), t_grid=t, field=fld,
                        boundary=op.boundary, mass_drift=drift)


def flat_group(u0: GridFunction, t_grid, pad: bool = True,
               chunk: int = 64) -> SpaceTimeField:
    """Exact constant-coefficient evolution e^{i t d_xx} by FFT multiplier."""
    t = np.asarray(t_grid, dtype=float)
    n = u0.n
    if pad:
        npad = 4 * n
        lead = (npad - n) // 2
        buf = np.zeros(npad, dtype=complex)
        buf[lead:lead + n] = u0.samples
    else:
        npad, lead = n, 0
        buf = u0.samples.astype(complex)
    xi = 2 * np.pi * np.fft.fftfreq(npad, d=u0.h)
    hat = np.fft.fft(buf)
    vals = np.empty((n, t.size), dtype=complex)
    for k0 in range(0, t.size, chunk):
        ts = t[k0:k0 + chunk]
        block = np.exp(-1j * xi[:, None] ** 2 * ts[None, :]) * hat[:, None]
        out = np.fft.ifft(block, axis=0)
        vals[:, k0:k0 + len(ts)] = out[lead:lead + n, :]
    dt = float(t[1] - t[0]) if t.size > 1 else 1.0
    return SpaceTimeField(x0=u0.x0, dx=u0.h, t0=float(t[0]), dt=dt, values=vals)


def eigen_oracle(op: DivergenceOperator, u0, t_grid) -> SpaceTimeField:
    """u(t) = sum_k e^{-i lambda_k t} <u0, e_k> e_k, exact for the discrete operator."""
    u = _as_vector(u0, op)
    t = np.asarray(t_grid, dtype=float)
    lam, vecs = op.eigh()
    coef = vecs.T @ u
    phases = np.exp(-1j * lam[:, None] * t[None, :])
    vals = vecs @ (phases * coef[:, None])
    dt = float(t[1] - t[0]) if t.size > 1 else 1.0
    return SpaceTimeField(x0=op.x0, dx=op.h, t0=float(t[0]), dt=dt, values=vals)
