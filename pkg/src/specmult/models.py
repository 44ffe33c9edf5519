"""Catalog of desk-scale self-adjoint operator models.

Two representations:

* truncated eigen-decompositions (lam_k, phi_k) orthonormal in the weighted
  inner product of their space -- dense for interval/Hermite models, symbol
  based for the translation-invariant circle/torus models;
* a continuum radial model on the truncated weighted half-line whose
  generalized eigenfunctions are the scattering kernel ell(lam x), with the
  spectral measure c_star lam^{n-1} dlam calibrated downstream.

All calculus downstream is exact on the retained subspace; completeness
claims are always tested through refinement in the truncation order.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import specfun
from .space import (
    MetricMeasureSpace,
    circle_space,
    halfline_space,
    interval_space,
    torus2_space,
)


class AliasingError(ValueError):
    """Truncation order too large for the grid."""


class CoverageError(ValueError):
    """Grid does not cover the classically allowed region."""


# ---------------------------------------------------------------------------
# Generic spectral model
# ---------------------------------------------------------------------------

@dataclass
class SpectralModel:
    """Truncated eigen-decomposition of a model operator L.

    kind is one of "dense", "conv1d", "conv2d".  Dense models carry the
    sampled eigenfunctions; convolutional ones act through their frequency
    lattice and materialize kernel data only column- or stencil-wise.
    """

    space: MetricMeasureSpace
    eigenvalues: np.ndarray  # of L, ascending, >= 0
    name: str
    kind: str = "dense"
    eigenfunctions: np.ndarray | None = None  # (K, N) for dense models
    lattice_absfreq: np.ndarray | None = None  # |m| on the fft lattice (conv)
    lattice_mask: np.ndarray | None = None  # retained modes (conv)

    @property
    def convolutional(self) -> bool:
        return self.kind in ("conv1d", "conv2d")

    @property
    def truncation(self) -> float:
        return float(self.eigenvalues[-1])

    # -- symbol plumbing ----------------------------------------------------

    def symbol(self, g) -> np.ndarray:
        """Evaluate a spectral function g(lam_of_L) on the retained modes."""
        if self.convolutional:
            lam = self.lattice_absfreq**2
            vals = np.asarray(g(lam))
            return np.where(self.lattice_mask, vals, 0.0)
        return np.asarray(g(self.eigenvalues))

    def apply(self, symbol, f):
        f = np.asarray(f)
        if self.kind == "conv1d":
            return np.fft.ifft(symbol * np.fft.fft(f))
        if self.kind == "conv2d":
            side = self.lattice_absfreq.shape[0]
            fl = f.reshape(side, side)
            out = np.fft.ifft2(symbol * np.fft.fft2(fl))
            return out.reshape(-1)
        coeff = self.eigenfunctions @ (self.space.weights * f)
        return (symbol * coeff) @ self.eigenfunctions

    def stencil(self, symbol) -> np.ndarray:
        """Kernel profile K(x, y) as a function of the grid offset (conv only)."""
        cell = self.space.total_mass / self.space.npoints
        if self.kind == "conv1d":
            out = np.fft.ifft(symbol) / cell
        elif self.kind == "conv2d":
            out = np.fft.ifft2(symbol) / cell
        else:
            raise ValueError("stencil is defined for convolutional models only")
        return out.real if np.max(np.abs(out.imag)) < 1e-12 * (np.max(np.abs(out)) + 1e-300) else out

    def kernel_column(self, symbol, j: int) -> np.ndarray:
        """K(., y_j): apply the operator to the unit point mass at y_j."""
        if self.kind == "conv1d":
            st = self.stencil(symbol)
            return np.roll(st, j)
        if self.kind == "conv2d":
            st = self.stencil(symbol)
            side = st.shape[0]
            j1, j2 = divmod(j, side)
            return np.roll(np.roll(st, j1, axis=0), j2, axis=1).reshape(-1)
        col = (symbol * self.eigenfunctions[:, j]) @ self.eigenfunctions
        return col

    def dense_kernel(self, symbol) -> np.ndarray:
        n = self.space.npoints
        if n > 4096:
            raise MemoryError(f"dense kernel capped at 4096 points, got {n}")
        if self.convolutional:
            cols = np.empty((n, n))
            for j in range(n):
                cols[:, j] = self.kernel_column(symbol, j).real
            return cols
        return (self.eigenfunctions.T * symbol) @ self.eigenfunctions

    def gram_defect(self) -> float:
        if self.convolutional:
            return 0.0  # discrete Fourier basis is exactly orthonormal
        g = (self.eigenfunctions * self.space.weights) @ self.eigenfunctions.T
        return float(np.max(np.abs(g - np.eye(len(self.eigenvalues)))))

    # -- persistence ----------------------------------------------------------

    def serialize(self) -> str:
        if self.convolutional or self.eigenfunctions is None:
            raise ValueError("only dense models serialize to eigen-data text")
        buf = io.StringIO()
        buf.write("# specmult model v1\n")
        buf.write(f"name {self.name}\n")
        buf.write(f"nmodes {len(self.eigenvalues)}\n")
        buf.write("eigenvalues " + " ".join(f"{v!r}" for v in self.eigenvalues) + "\n")
        buf.write("space-begin\n")
        buf.write(self.space.serialize())
        buf.write("space-end\n")
        for row in self.eigenfunctions:
            buf.write(" ".join(f"{v!r}" for v in row) + "\n")
        return buf.getvalue()


def deserialize_model(text: str) -> SpectralModel:
    from .space import deserialize_space

    lines = text.splitlines()
    name = lines[1].split(" ", 1)[1]
    nmodes = int(lines[2].split()[1])
    eigenvalues = np.array([float(v) for v in lines[3].split()[1:]])
    i0 = lines.index("space-begin") + 1
    i1 = lines.index("space-end")
    space = deserialize_space("\n".join(lines[i0:i1]))
    rows = [list(map(float, ln.split())) for ln in lines[i1 + 1 : i1 + 1 + nmodes] ]
    return SpectralModel(
        space=space,
        eigenvalues=eigenvalues,
        name=name,
        kind="dense",
        eigenfunctions=np.array(rows),
    )


# ---------------------------------------------------------------------------
# Exact catalog models
# ---------------------------------------------------------------------------

def interval_dirichlet(grid_size: int, k_max: int) -> SpectralModel:
    """Dirichlet model on [0, pi]: lam_k = k^2, phi_k = sqrt(2/pi) sin(kx)."""
    if k_max > grid_size // 4:
        raise AliasingError(
            f"k_max={k_max} violates the anti-aliasing bound grid/4={grid_size // 4}"
        )
    space = interval_space(grid_size)
    k = np.arange(1, k_max + 1)
    phi = math.sqrt(2.0 / math.pi) * np.sin(np.outer(k, space.points))
    return SpectralModel(
        space=space,
        eigenvalues=(k**2).astype(float),
        name=f"interval:{grid_size}:K={k_max}",
        kind="dense",
        eigenfunctions=phi,
    )


def interval_kernel(model: SpectralModel, symbol) -> np.ndarray:
    """Fast dense kernel for the interval model via the image decomposition
    K(x,y) = (1/pi)[S(x-y) - S(x+y)], S(u) = sum_k F(k^2) cos(k u)."""
    n = model.space.npoints
    h = model.space.points[1] - model.space.points[0]
    k = np.sqrt(model.eigenvalues)
    # S on the offset grids: x_i - y_j = (i-j) h ; x_i + y_j = (i+j+1) h
    m_diff = np.arange(-(n - 1), n) * h
    m_sum = np.arange(1, 2 * n) * h
    s_diff = np.cos(np.outer(m_diff, k)) @ symbol
    s_sum = np.cos(np.outer(m_sum, k)) @ symbol
    i = np.arange(n)
    kernel = (
        s_diff[i[:, None] - i[None, :] + (n - 1)] - s_sum[i[:, None] + i[None, :]]
    ) / math.pi
    return kernel


def circle(grid_size: int, k_max: int) -> SpectralModel:
    """Fourier model on the circle of circumference 2 pi (conv1d)."""
    if k_max > grid_size // 4:
        raise AliasingError(
            f"k_max={k_max} violates the anti-aliasing bound grid/4={grid_size // 4}"
        )
    space = circle_space(grid_size)
    m = np.fft.fftfreq(grid_size, d=1.0 / grid_size)
    mask = np.abs(m) <= k_max
    lam = np.sort((m[mask] ** 2).astype(float))
    return SpectralModel(
        space=space,
        eigenvalues=lam,
        name=f"circle:{grid_size}:K={k_max}",
        kind="conv1d",
        lattice_absfreq=np.abs(m),
        lattice_mask=mask,
    )


def circle_dense(model: SpectralModel) -> SpectralModel:
    """Dense twin of a circle model (real trigonometric eigenbasis)."""
    space = model.space
    k_max = int(np.sqrt(model.truncation))
    x = space.points
    rows = [np.full_like(x, 1.0 / math.sqrt(2.0 * math.pi))]
    lam = [0.0]
    for k in range(1, k_max + 1):
        rows.append(np.cos(k * x) / math.sqrt(math.pi))
        rows.append(np.sin(k * x) / math.sqrt(math.pi))
        lam.extend([float(k * k)] * 2)
    return SpectralModel(
        space=space,
        eigenvalues=np.array(lam),
        name=model.name + ":dense",
        kind="dense",
        eigenfunctions=np.vstack(rows),
    )


def torus2(grid_per_axis: int, k_max: int) -> SpectralModel:
    """Flat 2-torus Fourier model (conv2d); eigenvalues |m|^2 with multiplicity."""
    if k_max > grid_per_axis // 4:
        raise AliasingError(
            f"k_max={k_max} violates the anti-aliasing bound grid/4={grid_per_axis // 4}"
        )
    space = torus2_space(grid_per_axis)
    m = np.fft.fftfreq(grid_per_axis, d=1.0 / grid_per_axis)
    m1, m2 = np.meshgrid(m, m, indexing="ij")
    absfreq = np.sqrt(m1**2 + m2**2)
    mask = absfreq <= k_max
    lam = np.sort((absfreq[mask] ** 2).astype(float).ravel())
    return SpectralModel(
        space=space,
        eigenvalues=lam,
        name=f"torus2:{grid_per_axis}:K={k_max}",
        kind="conv2d",
        lattice_absfreq=absfreq,
        lattice_mask=mask,
    )


# ---------------------------------------------------------------------------
# Harmonic oscillator
# ---------------------------------------------------------------------------

def hermite_oscillator(dim: int, grid_size: int, k_max: int, extent: float | None = None):
    """Harmonic oscillator model: lam_m = 2m+1 (1D) or 2(m1+m2)+2 (2D).

    k_max truncates the spectrum at lam <= k_max.  The grid must cover the
    classically allowed region |x| <= sqrt(lam_max) of the largest retained
    eigenvalue.
    """
    if dim == 1:
        m_top = (k_max - 1) // 2
        lam = 2.0 * np.arange(m_top + 1) + 1.0
        turning = math.sqrt(lam[-1])
        ext = extent if extent is not None else turning + 6.0
        if ext < turning + 2.0:
            raise CoverageError(
                f"grid extent {ext:g} below the classically allowed radius {turning:g}+2"
            )
        h = 2.0 * ext / grid_size
        if h > math.pi / (2.0 * turning):
            raise CoverageError(
                f"grid step {h:g} cannot resolve oscillations at lam={lam[-1]:g}"
            )
        pts = -ext + (np.arange(grid_size) + 0.5) * h
        space = MetricMeasureSpace(
            pts, np.full(grid_size, h), "interval", 1.0,
            name=f"hermite-line:{grid_size}",
        )
        phi = specfun.hermite_basis(m_top, pts)
        return SpectralModel(
            space=space,
            eigenvalues=lam,
            name=f"hermite:g={grid_size}:K={k_max}",
            kind="dense",
            eigenfunctions=phi,
        )
    if dim == 2:
        return HermiteModel2D(grid_size, k_max, extent=extent)
    raise ValueError("dim must be 1 or 2")


class HermiteModel2D:
    """2D oscillator in factored form: products h_m1(x) h_m2(y).

    Eigenvalue 2(q+1) carries the cluster {m1 + m2 = q} of multiplicity
    q + 1.  Eigenfunction data stays factored through a 1D Hermite table;
    cluster design matrices are materialized on demand.
    """

    kind = "hermite2d"
    convolutional = False

    def __init__(self, grid_per_axis: int, k_max: int, extent: float | None = None):
        self.q_top = max(0, int(math.floor((k_max - 2.0) / 2.0)))
        lam_top = 2.0 * (self.q_top + 1)
        turning = math.sqrt(lam_top)
        ext = extent if extent is not None else turning + 6.0
        if ext < turning + 2.0:
            raise CoverageError(
                f"grid extent {ext:g} below the classically allowed radius {turning:g}+2"
            )
        h = 2.0 * ext / grid_per_axis
        if h > math.pi / (2.0 * turning):
            raise CoverageError(
                f"grid step {h:g} cannot resolve oscillations at lam={lam_top:g}"
            )
        self.axis = -ext + (np.arange(grid_per_axis) + 0.5) * h
        self.axis_w = np.full(grid_per_axis, h)
        self.htable = specfun.hermite_basis(self.q_top, self.axis)
        xx, yy = np.meshgrid(self.axis, self.axis, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        w2 = np.outer(self.axis_w, self.axis_w).ravel()
        self.space = MetricMeasureSpace(
            pts, w2, "plane2", 2.0, name=f"hermite-plane:{grid_per_axis}"
        )
        self.eigenvalues = 2.0 * (np.arange(self.q_top + 1) + 1.0)
        self.name = f"hermite2:g={grid_per_axis}:K={k_max}"

    @property
    def side(self) -> int:
        return len(self.axis)

    def cluster_multiplicity(self, q: int) -> int:
        return q + 1

    def cluster_design(self, q: int) -> np.ndarray:
        """Sampled eigenfunctions of the cluster m1 + m2 = q, shape (q+1, N)."""
        rows = np.empty((q + 1, self.side * self.side))
        for m1 in range(q + 1):
            rows[m1] = np.outer(self.htable[m1], self.htable[q - m1]).ravel()
        return rows

    def apply(self, symbol, f):
        """Spectral action with per-cluster symbol values (len q_top + 1)."""
        fl = np.asarray(f).reshape(self.side, self.side)
        hw = self.htable * self.axis_w
        coeff = hw @ fl @ hw.T  # (m1, m2) coefficients
        q1, q2 = np.meshgrid(
            np.arange(self.q_top + 1), np.arange(self.q_top + 1), indexing="ij"
        )
        qsum = q1 + q2
        gain = np.where(qsum <= self.q_top, np.asarray(symbol)[np.minimum(qsum, self.q_top)], 0.0)
        out = self.htable.T @ (gain * coeff) @ self.htable
        return out.reshape(-1)

    def symbol(self, g) -> np.ndarray:
        return np.asarray(g(self.eigenvalues))

    def kernel_column(self, symbol, j: int) -> np.ndarray:
        delta = np.zeros(self.side * self.side)
        delta[j] = 1.0 / self.space.weights[j]
        return self.apply(symbol, delta)

    def square_profile(self, symbol_sq) -> np.ndarray:
        """sum_k g(lam_k)^2 phi_k(y)^2 over the grid (orthonormal-side profile).

        Used by restricted 1->2 norms: with the quadrature Gram at identity,
        ||K(., y)||_{L^2(w)}^2 equals this profile at y.
        """
        h2 = self.htable**2
        out = np.zeros((self.side, self.side))
        for q in range(self.q_top + 1):
            if symbol_sq[q] == 0.0:
                continue
            acc = np.zeros((self.side, self.side))
            for m1 in range(q + 1):
                acc += np.outer(h2[m1], h2[q - m1])
            out += symbol_sq[q] * acc
        return out.reshape(-1)

    def gram_defect(self, q_limit: int = 8) -> float:
        worst = 0.0
        for q in range(min(q_limit, self.q_top) + 1):
            g = self.cluster_design(q)
            gram = (g * self.space.weights) @ g.T
            worst = max(worst, float(np.max(np.abs(gram - np.eye(q + 1)))))
        return worst


# ---------------------------------------------------------------------------
# Continuum radial model and its Galerkin companion
# ---------------------------------------------------------------------------

@dataclass
class ContinuumRadialModel:
    """Half-line model with spectral measure c_star lam^{n-1} dlam.

    Generalized eigenfunctions are ell(lam x); the table ell(lam_i x_j) is
    precomputed for the tensor quadrature of the radial calculus.
    """

    params: specfun.InverseSquareParams
    lam_grid: np.ndarray
    lam_w: np.ndarray
    x_grid: np.ndarray
    x_w: np.ndarray
    ell_table: np.ndarray  # (n_lam, n_x)
    c_star: float
    name: str

    @property
    def lam_max(self) -> float:
        return float(self.lam_grid[-1] + 0.5 * (self.lam_grid[1] - self.lam_grid[0]))

    def space(self) -> MetricMeasureSpace:
        return MetricMeasureSpace(
            self.x_grid, self.x_w, "halfline", self.params.n,
            name=f"radial-x:{len(self.x_grid)}",
        )


def radial_inverse_square(
    n: float,
    c: float,
    n_lam: int = 480,
    n_x: int = 4000,
    lam_max: float = 12.0,
    r_max: float = 20.0,
) -> ContinuumRadialModel:
    params = specfun.inverse_square_params(n, c)
    h_lam = lam_max / n_lam
    lam = (np.arange(n_lam) + 0.5) * h_lam
    lam_w = lam ** (n - 1.0) * h_lam
    eps = r_max * 2.0**-14
    h_x = (r_max - eps) / n_x
    x = eps + (np.arange(n_x) + 0.5) * h_x
    x_w = x ** (n - 1.0) * h_x
    ell = specfun.scattering_l(params, np.outer(lam, x))
    return ContinuumRadialModel(
        params=params,
        lam_grid=lam,
        lam_w=lam_w,
        x_grid=x,
        x_w=x_w,
        ell_table=ell,
        c_star=1.0,
        name=f"radial:n={n:g}:c={c:g}",
    )


def radial_galerkin(
    n: float, c: float, n_grid: int = 2000, r_max: float = 40.0, k_max: int | None = None
) -> SpectralModel:
    """Finite-difference companion discretizing the half-line quadratic form.

    The form int f' g' r^{n-1} dr + c int f g r^{n-3} dr is assembled on the
    midpoint grid with the coupling lumped per cell, preserving symmetry and
    nonnegativity above the Hardy threshold; Dirichlet ends.
    """
    specfun.inverse_square_params(n, c)  # validate coupling
    space = halfline_space(n_grid, n, r_max=r_max)
    r = space.points
    h = r[1] - r[0]
    edges = np.concatenate([[r[0] - h / 2.0], (r[:-1] + r[1:]) / 2.0, [r[-1] + h / 2.0]])
    edge_w = edges ** (n - 1.0)
    # stiffness: sum_edges (df/h)^2 r_edge^{n-1} h ; Dirichlet at both ends
    main = (edge_w[:-1] + edge_w[1:]) / h
    off = -edge_w[1:-1] / h
    main = main + c * r ** (n - 3.0) * h
    # weighted eigenproblem A v = lam W v, W = diag(x_w): symmetrize
    d = np.sqrt(space.weights)
    tri_main = main / d**2
    tri_off = off / (d[:-1] * d[1:])
    k = k_max if k_max is not None else min(n_grid, 600)
    vals, vecs = eigh_tridiagonal(tri_main, tri_off, select="i", select_range=(0, k - 1))
    phi = (vecs / d[:, None]).T  # orthonormal in the weighted inner product
    return SpectralModel(
        space=space,
        eigenvalues=vals,
        name=f"radial-galerkin:n={n:g}:c={c:g}:{n_grid}",
        kind="dense",
        eigenfunctions=phi,
    )


# ---------------------------------------------------------------------------
# Model spec strings
# ---------------------------------------------------------------------------

def model_from_name(name: str):
    """Parse model specs like interval:1024:K=256, circle:1024:K=256,
    torus2:g=64:K=16, hermite:g=512:K=128, hermite2:g=96:K=60,
    radial:n=3:c=-0.125, radial-galerkin:n=3:c=0."""
    parts = name.split(":")
    kind = parts[0]
    kw = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
    plain = [p for p in parts[1:] if "=" not in p]
    try:
        if kind == "interval":
            return interval_dirichlet(int(plain[0]), int(kw["K"]))
        if kind == "circle":
            return circle(int(plain[0]), int(kw["K"]))
        if kind == "torus2":
            return torus2(int(kw["g"]), int(kw["K"]))
        if kind == "hermite":
            return hermite_oscillator(1, int(kw["g"]), int(kw["K"]))
        if kind == "hermite2":
            return hermite_oscillator(2, int(kw["g"]), int(kw["K"]))
        if kind == "radial":
            return radial_inverse_square(
                float(kw["n"]), float(kw["c"]),
                lam_max=float(kw.get("lmax", 12.0)),
                r_max=float(kw.get("rmax", 40.0)),
            )
        if kind == "radial-galerkin":
            return radial_galerkin(float(kw["n"]), float(kw["c"]))
    except (KeyError, IndexError, ValueError, AliasingError, CoverageError) as exc:
        raise ValueError(f"bad model spec {name!r}: {exc}") from exc
    raise ValueError(f"unknown model kind {kind!r} in {name!r}")
