"""Multiplier-function toolkit.

Even functions F on symmetric grids, their scalings delta_R F(x) = F(Rx),
Fourier analysis with the convention Fhat(t) = int F(lam) e^{-i t lam} dlam,
the norm family (Sobolev W^{beta,q}, discretized ||.||_{N,q}, Besov-style
dyadic sums) and the explicit decompositions used by the condition scans:
dyadic frequency pieces, the moment-corrected mollifier, the low-frequency
splitting of Bochner-Riesz symbols, and the shifted-window kernel pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import fftconvolve


# ---------------------------------------------------------------------------
# Core value type
# ---------------------------------------------------------------------------

@dataclass
class MultiplierFn:
    """Sampled even function on a uniform symmetric grid over [-L, L].

    `fn`, when present, is an exact evaluator used instead of interpolation;
    `fourier_support` records a declared support radius of the Fourier
    transform (inf when none is claimed).
    """

    grid: np.ndarray
    values: np.ndarray
    support_radius: float = math.inf
    even: bool = True
    fn: object = None
    fourier_support: float = math.inf
    label: str = ""

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid/values shape mismatch")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("multiplier samples must be finite")

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def lam_max(self) -> float:
        return float(self.grid[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.fn is not None:
            out = np.asarray(self.fn(x), dtype=self.values.dtype)
        else:
            out = np.interp(x, self.grid, self.values, left=0.0, right=0.0)
        if np.isscalar(x) or x.ndim == 0:
            return complex(out) if np.iscomplexobj(self.values) else float(out)
        return out

    def evenness_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values[::-1])))

    def l_q(self, q: float) -> float:
        """||F||_q by grid quadrature (q = inf: grid max)."""
        if q == math.inf:
            return float(np.max(np.abs(self.values)))
        return float((self.step * np.abs(self.values) ** q).sum() ** (1.0 / q))

    def serialize(self) -> str:
        lines = ["# specmult multiplier v1  (lambda, F(lambda))"]
        for lam, v in zip(self.grid, self.values):
            lines.append(f"{lam!r} {v!r}")
        return "\n".join(lines) + "\n"


def deserialize_multiplier(text: str) -> MultiplierFn:
    rows = [
        tuple(map(float, ln.split()))
        for ln in text.splitlines()
        if ln.strip() and not ln.startswith("#")
    ]
    arr = np.array(rows)
    return MultiplierFn(grid=arr[:, 0], values=arr[:, 1])


def from_callable(
    fn,
    lam_max: float,
    npoints: int = 4096,
    support_radius: float = math.inf,
    fourier_support: float = math.inf,
    label: str = "",
) -> MultiplierFn:
    grid = np.linspace(-lam_max, lam_max, npoints, endpoint=False)
    grid = grid + (grid[1] - grid[0]) / 2.0  # symmetric midpoint grid
    return MultiplierFn(
        grid=grid,
        values=np.asarray(fn(grid)),
        support_radius=support_radius,
        fn=fn,
        fourier_support=fourier_support,
        label=label,
    )


# ---------------------------------------------------------------------------
# Fourier helpers:  Fhat(t) = int F(lam) exp(-i t lam) dlam
# ---------------------------------------------------------------------------

def fourier_transform(F: MultiplierFn, pad: int = 4):
    """(t_grid, Fhat) via padded FFT in the stated convention."""
    n = len(F.grid) * pad
    h = F.step
    vals = np.zeros(n, dtype=complex)
    vals[: len(F.grid)] = F.values
    t = 2.0 * math.pi * np.fft.fftfreq(n, d=h)
    phase = np.exp(-1j * t * F.grid[0])
    ft = h * phase * np.fft.fft(vals)
    order = np.argsort(t)
    return t[order], ft[order]


def fourier_at(F: MultiplierFn, t) -> np.ndarray:
    """Direct quadrature of Fhat at arbitrary t (vectorized)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    ker = np.exp(-1j * np.outer(t, F.grid))
    return F.step * (ker @ F.values.astype(complex))


def inverse_fourier_on(t_grid, fhat, lam) -> np.ndarray:
    """(1/2pi) int fhat(t) e^{i t lam} dt by quadrature on t_grid."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    dt = t_grid[1] - t_grid[0]
    ker = np.exp(1j * np.outer(lam, t_grid))
    return (dt / (2.0 * math.pi)) * (ker @ fhat)


def fourier_mass_outside(F: MultiplierFn, radius: float, pad: int = 4) -> float:
    """Relative l1 mass of Fhat beyond |t| > radius (side-lobe level)."""
    t, ft = fourier_transform(F, pad=pad)
    tot = np.abs(ft).sum()
    if tot == 0.0:
        return 0.0
    return float(np.abs(ft[np.abs(t) > radius]).sum() / tot)


# ---------------------------------------------------------------------------
# Cutoff family
# ---------------------------------------------------------------------------

def _smoothstep(u):
    """C^inf monotone step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    a = np.zeros_like(u)
    pos = u > 0
    a[pos] = np.exp(-1.0 / u[pos])
    b = np.zeros_like(u)
    neg = u < 1
    b[neg] = np.exp(-1.0 / (1.0 - u[neg]))
    return a / (a + b)


def plateau(x, flat: float, cutoff: float):
    """Even C_c^inf plateau: 1 on [-flat, flat], 0 outside (-cutoff, cutoff)."""
    ax = np.abs(np.asarray(x, dtype=float))
    return _smoothstep((cutoff - ax) / (cutoff - flat))


def bump(x, a: float, b: float):
    """Even C_c^inf bump supported on {a < |x| < b} (a=0: supported (-b, b))."""
    ax = np.abs(np.asarray(x, dtype=float))
    if a <= 0.0:
        u = ax / b
        out = np.zeros_like(u)
        inside = u < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out
    mid = (a + b) / 2.0
    halfwidth = (b - a) / 2.0
    u = (ax - mid) / halfwidth
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


@dataclass
class CutoffFamily:
    """The auxiliary cutoffs behind the dyadic machinery.

    eta:   even, supp in {1/4 <= |xi| <= 1}, sum_l eta(2^-l xi) = 1 for xi > 0.
           Built as eta(xi) = plateau(xi) - plateau(2 xi) with a plateau equal
           to 1 on [-1/2, 1/2] and supported in (-1, 1), so the support claim
           holds exactly.
    psi:   plateau equal to 1 on (-2, 2), supported in (-4, 4).
    phi:   C_c^inf(2, 8) tail piece with psi + sum_k phi(2^-k lam) = 1, lam > 0.
    """

    def eta(self, xi):
        return plateau(xi, 0.5, 1.0) - plateau(2.0 * np.asarray(xi, dtype=float), 0.5, 1.0)

    def eta0(self, xi):
        # 1 - sum_{l > 0} eta(2^-l xi) telescopes back to the plateau itself
        return plateau(xi, 0.5, 1.0)

    def psi(self, lam):
        return plateau(lam, 2.0, 4.0)

    def phi(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.psi(lam / 2.0) - self.psi(lam)

    def eta_partition_defect(self, lam) -> float:
        lam = np.asarray(lam, dtype=float)
        lam = lam[lam > 0]
        lmin = math.floor(math.log2(lam.min())) - 1
        lmax = math.ceil(math.log2(lam.max())) + 2
        total = np.zeros_like(lam)
        for ell in range(lmin, lmax + 1):
            total += self.eta(lam * 2.0**-ell)
        return float(np.max(np.abs(total - 1.0)))

    def psi_phi_partition_defect(self, lam, k_max: int = 64) -> float:
        lam = np.asarray(lam, dtype=float)
        lam = lam[lam > 0]
        total = self.psi(lam)
        for k in range(k_max + 1):
            total = total + self.phi(lam * 2.0**-k)
        return float(np.max(np.abs(total - 1.0)))

    def xi(self, beta: float, npoints: int = 8192):
        """Moment-corrected mollifier for smoothness order beta.

        xi = b * P with b an even C_c^inf(-1, 1) bump and P an even
        polynomial solving xihat(0) = 1, xihat^(k)(0) = 0 for
        1 <= k <= floor(beta) + 2.  Returns (MultiplierFn, residual).
        """
        k_top = int(math.floor(beta)) + 2
        degree = k_top // 2  # even moments 0, 2, ..., 2*degree cover k <= k_top
        u = np.linspace(-1.0, 1.0, npoints, endpoint=False)
        u = u + (u[1] - u[0]) / 2.0
        h = u[1] - u[0]
        b = bump(u, 0.0, 1.0)
        # M[j, i] = int u^{2j} u^{2i} b(u) du ; solve M c = e_0
        mom = np.array(
            [[float((u ** (2 * (i + j)) * b).sum() * h) for i in range(degree + 1)]
             for j in range(degree + 1)]
        )
        rhs = np.zeros(degree + 1)
        rhs[0] = 1.0
        coeff = np.linalg.solve(mom, rhs)
        pvals = sum(c * u ** (2 * i) for i, c in enumerate(coeff))
        xi_vals = b * pvals
        residual = float(np.max(np.abs(mom @ coeff - rhs)))

        def xi_fn(x, _u=u, _c=coeff):
            x = np.asarray(x, dtype=float)
            bb = bump(x, 0.0, 1.0)
            pp = sum(c * x ** (2 * i) for i, c in enumerate(_c))
            return bb * pp

        F = MultiplierFn(grid=u, values=xi_vals, support_radius=1.0, fn=xi_fn,
                         label=f"xi:beta={beta:g}")
        return F, residual

    def xi_moment_defects(self, beta: float, k_max: int | None = None):
        """|xihat^(k)(0)| for k = 0..k_max (k=0 entry is |xihat(0) - 1|)."""
        xi_f, _ = self.xi(beta)
        k_top = k_max if k_max is not None else int(math.floor(beta)) + 2
        u, h, v = xi_f.grid, xi_f.step, xi_f.values
        out = []
        for k in range(k_top + 1):
            # xihat^(k)(0) = (-i)^k int u^k xi(u) du
            m = float((u**k * v).sum() * h)
            out.append(abs(m - (1.0 if k == 0 else 0.0)))
        return out


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------

def scale(F: MultiplierFn, R: float) -> MultiplierFn:
    """delta_R F with (delta_R F)(x) = F(R x); support radius divides by R."""
    if R <= 0:
        raise ValueError("scaling factor must be positive")

    def scaled(x, _R=R, _F=F):
        return _F(np.asarray(x, dtype=float) * _R)

    return MultiplierFn(
        grid=F.grid / R,
        values=F.values.copy(),
        support_radius=F.support_radius / R,
        fn=scaled,
        fourier_support=F.fourier_support * R,
        label=f"d{R:g}({F.label})" if F.label else "",
    )


def critical_exponent(p: float, q: float, n: float) -> float:
    """delta_q(p) = max{0, n |1/p - 1/2| - 1/q}; q = 2 is the delta(p) alias."""
    if not (1.0 <= p) or not (1.0 <= q):
        raise ValueError("need p, q >= 1")
    inv_p = 0.0 if p == math.inf else 1.0 / p
    inv_q = 0.0 if q == math.inf else 1.0 / q
    return max(0.0, n * abs(inv_p - 0.5) - inv_q)


def nq_norm(F: MultiplierFn, N: int, q: float, samples_per_cell: int = 64) -> float:
    """Cell-sup discretized norm over the uniform partition of [-1, 1].

    ||F||_{N,q} = ((1/2N) sum_{l=1-N}^{N} sup_{[(l-1)/N, l/N)} |F|^q)^{1/q};
    q = inf returns the sup norm.
    """
    if N < 1 or int(N) != N:
        raise ValueError("N must be a positive integer")
    if F.support_radius > 1.0 + 1e-12:
        tail = np.abs(F.values[np.abs(F.grid) > 1.0])
        if tail.size and tail.max() > 1e-12:
            raise ValueError("nq_norm requires supp F inside [-1, 1]")
    N = int(N)
    sups = np.empty(2 * N)
    for idx, ell in enumerate(range(1 - N, N + 1)):
        left, right = (ell - 1) / N, ell / N
        pts = np.linspace(left, right, samples_per_cell, endpoint=False)
        sups[idx] = np.max(np.abs(F(pts)))
    if q == math.inf:
        return float(np.max(sups))
    return float(((sups**q).sum() / (2.0 * N)) ** (1.0 / q))


def sobolev_norm(F: MultiplierFn, beta: float, q: float, pad: int = 4) -> float:
    """||(I - d^2/dx^2)^{beta/2} F||_q via the Fourier symbol (1 + t^2)^{beta/2}.

    Raises ResolutionError when the weighted spectrum has not decayed at the
    edge of the trusted frequency window.
    """
    from .space import ResolutionError

    edge = np.max(np.abs(F.values[[0, -1]]))
    scale0 = np.max(np.abs(F.values)) + 1e-300
    if edge > 1e-6 * scale0:
        raise ResolutionError("multiplier does not decay inside its grid")
    n = len(F.grid) * pad
    h = F.step
    vals = np.zeros(n)
    vals[: len(F.grid)] = F.values.real
    t = 2.0 * math.pi * np.fft.fftfreq(n, d=h)
    ft = np.fft.fft(vals) * h
    sym = (1.0 + t * t) ** (beta / 2.0)
    weighted = sym * ft
    trust = np.abs(t) > 0.9 * np.abs(t).max()
    if np.max(np.abs(weighted[trust])) > 1e-6 * (np.max(np.abs(weighted)) + 1e-300):
        raise ResolutionError(
            f"symbol-weighted spectrum not resolved for beta={beta:g}: refine the grid"
        )
    g = np.real(np.fft.ifft(sym * np.fft.fft(vals)))[: len(F.grid)]
    if q == math.inf:
        return float(np.max(np.abs(g)))
    return float((h * np.abs(g) ** q).sum() ** (1.0 / q))


def besov_sum(F: MultiplierFn, family: CutoffFamily, s: float, q: float,
              l_max: int | None = None) -> float:
    """sum_l 2^{l s} ||F^(l)||_q over the dyadic pieces (Besov-type B^s_{q,1})."""
    pieces = dyadic_decompose(F, family, l_max=l_max)
    return float(sum(2.0 ** (ell * s) * piece.l_q(q) for ell, piece in enumerate(pieces)))


def dyadic_decompose(F: MultiplierFn, family: CutoffFamily, l_max: int | None = None,
                     pad: int = 4):
    """Frequency-dyadic pieces F^(0), F^(1), ... with Fhat weights eta(2^-l t).

    Reconstruction sum_l F^(l) = F holds to grid accuracy; piece l has
    Fourier support inside {|t| <= 2^l}.
    """
    if not F.even or F.evenness_defect() > 1e-10:
        raise ValueError("dyadic decomposition requires an even multiplier")
    t, ft = fourier_transform(F, pad=pad)
    t_top = np.abs(t).max()
    if l_max is None:
        l_max = max(1, int(math.ceil(math.log2(t_top))) + 1)
    pieces = []
    for ell in range(l_max + 1):
        wt = family.eta0(t) if ell == 0 else family.eta(t * 2.0**-ell)
        piece_hat = wt * ft

        def piece_fn(lam, _t=t, _ph=piece_hat):
            return np.real(inverse_fourier_on(_t, _ph, np.asarray(lam, dtype=float)))

        vals = piece_fn(F.grid)
        pieces.append(
            MultiplierFn(
                grid=F.grid.copy(),
                values=vals,
                support_radius=math.inf,
                fn=piece_fn,
                fourier_support=2.0**ell,
                label=f"{F.label}^({ell})" if F.label else f"piece{ell}",
            )
        )
    return pieces


def mollifier_defect(
    H: MultiplierFn,
    N: int,
    beta: float,
    q: float,
    family: CutoffFamily,
):
    """(||H - xi_N * H||_{N,q}, ratio to N^-beta ||H||_{W^{beta,q}})."""
    if H.support_radius > 1.0 + 1e-12:
        raise ValueError("mollifier defect requires supp H inside [-1, 1]")
    inv_q = 0.0 if q == math.inf else 1.0 / q
    if beta <= inv_q:
        raise ValueError(f"need beta > 1/q (beta={beta:g}, 1/q={inv_q:g})")
    conv = mollify(H, N, beta, family)
    diff = MultiplierFn(
        grid=H.grid.copy(),
        values=H.values - conv.values,
        support_radius=max(H.support_radius, conv.support_radius),
    )
    # the difference leaks mass just past |lam| = 1 by the mollifier width;
    # measure the N,q norm of the restriction, which is what the bound controls
    diff.support_radius = 1.0
    defect = nq_norm(diff, N, q)
    bound = N ** (-beta) * sobolev_norm(H, beta, q)
    return defect, defect / bound if bound > 0 else math.inf


def mollify(H: MultiplierFn, N: int, beta: float, family: CutoffFamily) -> MultiplierFn:
    """xi_N * H with xi_N = N xi(N .), computed on H's grid."""
    xi_f, _ = family.xi(beta)
    h = H.step
    half = int(math.ceil(1.0 / (N * h)))
    u = np.arange(-half, half + 1) * h
    kernel = N * xi_f(N * u) * h
    vals = fftconvolve(H.values.real, kernel, mode="same")
    return MultiplierFn(
        grid=H.grid.copy(),
        values=vals,
        support_radius=H.support_radius + 1.0 / N,
    )


# ---------------------------------------------------------------------------
# Bochner-Riesz symbols and their splittings
# ---------------------------------------------------------------------------

def bochner_riesz_fn(
    R: float,
    delta: float,
    lam_max: float | None = None,
    npoints: int = 8192,
    sqrt_variant: bool = True,
) -> MultiplierFn:
    """S_R^delta as a multiplier.

    sqrt_variant=True gives lam -> (1 - lam^2/R^2)_+^delta (the sqrt-L
    variable, support radius R); otherwise lam -> (1 - lam/R^2)_+^delta
    for lam >= 0 (the L variable, support radius R^2).  delta < 0 is
    accepted for norm experiments only; the symbol is then unbounded at the
    support edge and sampled as such.
    """
    if R <= 0:
        raise ValueError("R must be positive")

    if sqrt_variant:
        def fn(lam, _R=R, _d=delta):
            lam = np.asarray(lam, dtype=float)
            base = 1.0 - (lam / _R) ** 2
            out = np.zeros_like(base)
            pos = base > 0
            out[pos] = base[pos] ** _d
            return out

        span = lam_max if lam_max is not None else 1.5 * R
        return from_callable(fn, span, npoints, support_radius=R,
                             label=f"br:R={R:g}:delta={delta:g}")

    def fn_l(lam, _R=R, _d=delta):
        lam = np.asarray(lam, dtype=float)
        base = 1.0 - lam / _R**2
        out = np.zeros_like(base)
        pos = (base > 0) & (lam >= 0)
        out[pos] = base[pos] ** _d
        return out

    span = lam_max if lam_max is not None else 1.5 * R * R
    F = from_callable(fn_l, span, npoints, support_radius=R * R,
                      label=f"brL:R={R:g}:delta={delta:g}")
    F.even = False
    return F


def phi_fn(lam):
    """Phi(lam) = 6 lam^-3 (lam - sin lam), Taylor-switched near 0."""
    lam = np.asarray(lam, dtype=float)
    out = np.empty_like(lam)
    small = np.abs(lam) < 1e-2
    ls = lam[small]
    out[small] = 1.0 - ls**2 / 20.0 + ls**4 / 840.0 - ls**6 / 60480.0
    lb = lam[~small]
    out[~small] = 6.0 * (lb - np.sin(lb)) / lb**3
    return out if out.ndim else float(out)


def phi_hat(t):
    """Fourier transform of Phi: 3 pi (1 - |t|)_+^2."""
    t = np.asarray(t, dtype=float)
    out = 3.0 * math.pi * np.clip(1.0 - np.abs(t), 0.0, None) ** 2
    return out if out.ndim else float(out)


@dataclass
class TaoPiece:
    """Low-frequency splitting S_R^d(lam^2) = eta_k n_k + S_R^d(lam^2) n_k."""

    R: float
    delta: float
    N: int
    k: int
    n_k: MultiplierFn
    eta_k: MultiplierFn

    @property
    def fourier_bound(self) -> float:
        return 2.0**self.k / self.R


def tao_decomposition(R: float, delta: float, N_even: int, k: int,
                      lam_max: float | None = None, npoints: int = 8192) -> TaoPiece:
    """Piece k <= 0 of the splitting used by the weak-type endpoint argument.

    n_k(lam) = Phi^{N/2}(2^k lam / (R N)), whose Fourier transform is
    supported in [-2^k/R, 2^k/R]; eta_k = S_R^delta(lam^2)(1 - n_k)/n_k.
    """
    if N_even < 4 or N_even % 2:
        raise ValueError("N must be an even integer >= 4")
    if k > 0:
        raise ValueError("this construction covers k <= 0 only")
    a = 2.0**k / (R * N_even)

    def n_fn(lam, _a=a, _half=N_even // 2):
        return phi_fn(np.asarray(lam, dtype=float) * _a) ** _half

    def eta_fn(lam, _R=R, _d=delta):
        lam = np.asarray(lam, dtype=float)
        s = np.clip(1.0 - (lam / _R) ** 2, 0.0, None) ** _d
        nk = n_fn(lam)
        return s * (1.0 - nk) / nk

    span = lam_max if lam_max is not None else 4.0 * R
    n_k = from_callable(n_fn, span, npoints, fourier_support=2.0**k / R,
                        label=f"n_{k}")
    eta_k = from_callable(eta_fn, span, npoints, support_radius=R, label=f"eta_{k}")
    return TaoPiece(R=R, delta=delta, N=N_even, k=k, n_k=n_k, eta_k=eta_k)


def tao_split_residual(piece: TaoPiece, lam=None) -> float:
    """Max residual of S_R^d(lam^2) = eta_k n_k + S_R^d(lam^2) n_k on the grid."""
    lam = piece.n_k.grid if lam is None else np.asarray(lam, dtype=float)
    s = np.clip(1.0 - (lam / piece.R) ** 2, 0.0, None) ** piece.delta
    lhs = s
    rhs = piece.eta_k(lam) * piece.n_k(lam) + s * piece.n_k(lam)
    return float(np.max(np.abs(lhs - rhs)))


def tao_eta_square_sum(R: float, delta: float, N_even: int, k_min: int = -20,
                       lam=None) -> float:
    """sup over the lambda grid of sum_{k=k_min}^{0} |eta_k(lam)|^2."""
    if lam is None:
        lam = np.linspace(-R, R, 4097)
    total = np.zeros_like(np.asarray(lam, dtype=float))
    for k in range(k_min, 1):
        piece = tao_decomposition(R, delta, N_even, k, npoints=64)
        total += np.abs(piece.eta_k(lam)) ** 2
    return float(np.max(total))


def tao_envelope_constant(piece: TaoPiece, lam=None) -> float:
    """Least C with |n_k(lam)| <= C (1 + 2^k |lam| / R)^{-N} on the sample grid."""
    lam = piece.n_k.grid if lam is None else np.asarray(lam, dtype=float)
    envelope = (1.0 + 2.0**piece.k * np.abs(lam) / piece.R) ** (-piece.N)
    return float(np.max(np.abs(piece.n_k(lam)) / envelope))


def measured_fourier_support(F: MultiplierFn, bound: float, rel_tol: float = 1e-8,
                             u_span: float = 40.0, npts: int = 20001):
    """Check the declared Fourier support radius by direct quadrature.

    Returns (inside_level, outside_level): |Fhat| just inside (0.95 bound)
    and just outside (bound * (1 + 1e-6)), both relative to |Fhat(0)|.
    """
    span = max(u_span / max(bound, 1e-12), F.lam_max)
    grid = np.linspace(-span, span, npts)
    vals = F(grid)
    h = grid[1] - grid[0]

    def fhat(t):
        return abs((vals * np.exp(-1j * t * grid)).sum() * h)

    ref = fhat(0.0) + 1e-300
    inside = fhat(0.95 * bound) / ref
    outside = max(fhat(bound * (1.0 + 1e-6)), fhat(bound * 1.25), fhat(bound * 2.0)) / ref
    return inside, outside


# ---------------------------------------------------------------------------
# Shifted-window kernel pair
# ---------------------------------------------------------------------------

@dataclass
class WindowPair:
    k: int
    G: MultiplierFn

    def ghat(self, xi):
        """3 pi (1 - |xi|)_+^2 e^{-i k xi}."""
        xi = np.asarray(xi, dtype=float)
        return phi_hat(xi) * np.exp(-1j * self.k * xi)

    def lower_bound_constant(self, samples: int = 4096) -> float:
        lam = np.linspace(self.k, self.k + 1.0, samples, endpoint=False)
        return float(np.min(self.G(lam) * np.exp(-lam / (2.0 * self.k))))


def gk_fn(k: int, lam_max: float | None = None, npoints: int = 8192) -> WindowPair:
    """G_k(lam) = Phi(lam - k): unit-window lower bound with explicit transform."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def fn(lam, _k=k):
        return phi_fn(np.asarray(lam, dtype=float) - _k)

    span = lam_max if lam_max is not None else abs(k) + 40.0
    G = from_callable(fn, span, npoints, fourier_support=1.0, label=f"gk:{k}")
    G.even = False
    return WindowPair(k=k, G=G)


def gk_direct(k: int, lam):
    """6 (lam-k)^-2 - 6 sin(lam-k)/(lam-k)^3 (the expanded form of G_k)."""
    u = np.asarray(lam, dtype=float) - k
    out = np.where(np.abs(u) < 1e-2, phi_fn(u), 0.0)
    big = np.abs(u) >= 1e-2
    ub = np.where(big, u, 1.0)
    out = np.where(big, 6.0 / ub**2 - 6.0 * np.sin(ub) / ub**3, out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Multiplier spec strings
# ---------------------------------------------------------------------------

def multiplier_from_name(name: str, pathdir=None) -> MultiplierFn:
    """Parse CLI specs: br:R=64:delta=0.5, bump:a=0:b=1, indicator:a=1:b=2,
    gauss:center=4:width=0.5, heat:t=0.1, phi, gk:k=5, custom:file=..."""
    parts = name.split(":")
    kind = parts[0]
    kw = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
    try:
        if kind == "br":
            return bochner_riesz_fn(float(kw["R"]), float(kw["delta"]))
        if kind == "bump":
            a, b = float(kw["a"]), float(kw["b"])
            return from_callable(lambda x: bump(x, a, b), 1.5 * b,
                                 support_radius=b, label=name)
        if kind == "indicator":
            a, b = float(kw["a"]), float(kw["b"])

            def ind(x, _a=a, _b=b):
                ax = np.abs(np.asarray(x, dtype=float))
                return ((ax >= _a) & (ax < _b)).astype(float)

            return from_callable(ind, 1.5 * b, support_radius=b, label=name)
        if kind == "gauss":
            c, wdt = float(kw["center"]), float(kw["width"])

            def g(x, _c=c, _w=wdt):
                x = np.asarray(x, dtype=float)
                return np.exp(-((np.abs(x) - _c) ** 2) / (2.0 * _w**2))

            return from_callable(g, c + 10.0 * wdt, label=name)
        if kind == "heat":
            t = float(kw["t"])
            return from_callable(lambda x: np.exp(-t * np.asarray(x) ** 2),
                                 max(10.0, 8.0 / math.sqrt(t)), label=name)
        if kind == "phi":
            return from_callable(phi_fn, 60.0, fourier_support=1.0, label=name)
        if kind == "gk":
            return gk_fn(int(kw["k"])).G
        if kind == "custom":
            import pathlib

            path = pathlib.Path(kw["file"])
            if pathdir is not None and not path.is_absolute():
                path = pathlib.Path(pathdir) / path
            return deserialize_multiplier(path.read_text())
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad multiplier spec {name!r}: {exc}") from exc
    raise ValueError(f"unknown multiplier kind {kind!r} in {name!r}")
