"""Heat semigroup of the divergence-form operator, Gaussian kernel-bound
fitting, and the semigroup-based band projectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .evolution import DivergenceOperator, EIGEN_GUARD_N
from .fields import GridFunction
from .norms import LittlewoodPaleyBank, lp_project, default_bank

KERNEL_GUARD_N = 2048


def heat_apply(op: DivergenceOperator, f, t: float, method: str = "auto",
               substeps: int = 64) -> np.ndarray:
    """e^{-tA} f.

    Exact in the discrete operator through its eigendecomposition when the
    grid allows it; Crank-Nicolson substepping otherwise.
    """
    if t <= 0:
        raise ValueError("heat time must be positive")
    u = f.samples.astype(complex) if isinstance(f, GridFunction) else np.asarray(f, dtype=complex)
    if u.size != op.n:
        raise ValueError("datum length does not match the operator grid")
    if method == "auto":
        method = "eigen" if op.n <= EIGEN_GUARD_N else "cn"
    if method == "eigen":
        lam, vecs = op.eigh()
        out = vecs @ (np.exp(-t * lam) * (vecs.T @ u))
    elif method == "cn":
        dt = t / substeps
        eye = sp.identity(op.n, format="csc")
        lu = spla.splu((eye + 0.5 * dt * op.matrix).tocsc())
        rhs = (eye - 0.5 * dt * op.matrix).tocsc()
        out = u
        for _ in range(substeps):
            out = lu.solve(rhs @ out)
    else:
        raise ValueError("method must be 'auto', 'eigen' or 'cn'")
    if np.max(np.abs(u.imag)) == 0:
        return out.real.astype(complex)
    return out


@dataclass
class HeatKernelMatrix:
    t: float
    matrix: np.ndarray          # K[i, j] ~ K(x_i, y_j, t)
    x0: float
    h: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def grid(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T)))

    def row_masses(self) -> np.ndarray:
        return self.matrix.sum(axis=1) * self.h


def kernel_matrix(op: DivergenceOperator, t: float) -> HeatKernelMatrix:
    """Dense heat kernel: columns are e^{-tA} applied to grid deltas / h."""
    if op.n > KERNEL_GUARD_N:
        raise ValueError(f"kernel matrix refused for n = {op.n} > {KERNEL_GUARD_N}")
    lam, vecs = op.eigh()
    K = (vecs * np.exp(-t * lam)) @ vecs.T / op.h
    return HeatKernelMatrix(t=t, matrix=K.real, x0=op.x0, h=op.h)


@dataclass(frozen=True)
class GaussianFit:
    power: float        # t-power of the fitted shape t^power e^{-c |x-y|^2 / t}
    C_fit: float
    c_fit: float
    residual: float     # max of log|K| - log(model) over the fit window
    n_points: int


def _fit_window(K: HeatKernelMatrix, values: np.ndarray, floor: float = 1e-14):
    x = K.grid
    d2 = (x[:, None] - x[None, :]) ** 2
    sel = (d2 <= (6.0 * np.sqrt(K.t)) ** 2) & (np.abs(values) > floor)
    # keep the window clear of the box edges where Dirichlet truncation bites
    edge = max(2, K.n // 16)
    mask = np.zeros_like(sel)
    mask[edge:-edge, edge:-edge] = True
    sel &= mask
    return d2[sel] / K.t, np.log(np.abs(values[sel])), int(sel.sum())


def gaussian_fit(K: HeatKernelMatrix, values: np.ndarray | None = None,
                 power: float = -0.5) -> GaussianFit:
    """Least-squares (C, c) in |values| <= C t^{power} e^{-c|x-y|^2/t}.

    values defaults to the kernel itself (the power -1/2 shape); pass the
    differentiated kernel with power -1 or the operator image with power -3/2.
    """
    vals = K.matrix if values is None else values
    z, logk, npts = _fit_window(K, vals)
    if npts < 8:
        raise ValueError("kernel below floor on the fit window; fit degenerate")
    # log|K| ~ log C + power*log t - c z
    A = np.stack([np.ones_like(z), -z], axis=1)
    b = logk - power * np.log(K.t)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    log_c0, c = sol
    model = log_c0 + power * np.log(K.t) - c * z
    residual = float(np.max(logk - model))
    return GaussianFit(power=power, C_fit=float(np.exp(log_c0)), c_fit=float(c),
                       residual=residual, n_points=npts)


def differentiated_kernel(K: HeatKernelMatrix, axis: int = 0) -> np.ndarray:
    """Fourth-order centered derivative of the kernel along x (axis 0) or y."""
    M = K.matrix if axis == 0 else K.matrix.T
    D = np.zeros_like(M)
    h = K.h
    D[2:-2] = (-M[4:] + 8 * M[3:-1] - 8 * M[1:-3] + M[:-4]) / (12 * h)
    D[:2] = D[2]
    D[-2:] = D[-3]
    return D if axis == 0 else D.T


def operator_kernel(op: DivergenceOperator, K: HeatKernelMatrix) -> np.ndarray:
    """A K(., y, t) column by column."""
    return op.matrix @ K.matrix


def lp_A_project(op: DivergenceOperator, f, j: int, method: str = "auto") -> np.ndarray:
    """Semigroup band projector: 4^{-j} A e^{-4^{-j} A} f."""
    t = 4.0 ** (-j)
    u = heat_apply(op, f, t, method=method)
    return t * (op.matrix @ u)


def lp_A_reconstruction_constant() -> float:
    """Riemann value of sum_j m(4^{-j} lam) for m(u) = u e^{-u}: 1/log 4."""
    return 1.0 / np.log(4.0)


def offdiagonal_decay(op: DivergenceOperator, bank: LittlewoodPaleyBank,
                      j: int, k: int, p: float = 2.0, probes: int = 4,
                      seed: int = 0) -> float:
    """max over probes of ||(semigroup band j)(fourier band k) f||_p / ||f||_p.

    Probes are seeded white noise filtered onto Fourier band k.
    """
    rng = np.random.default_rng(seed)
    x0 = op.x0
    x1 = op.x0 + op.h * (op.n - 1 if op.boundary == "dirichlet" else op.n)
    worst = 0.0
    for _ in range(probes):
        noise = rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n)
        f = GridFunction(x0, x1, noise)
        fk = lp_project(f, k, bank, pad=True)
        nf = fk.norm_lp(p)
        if nf == 0:
            continue
        out = lp_A_project(op, fk.samples, j)
        worst = max(worst, GridFunction(x0, x1, out).norm_lp(p) / nf)
    return worst
