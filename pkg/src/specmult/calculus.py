"""Functional calculus on the model catalog.

Spectral operators F(sqrt(L)), wave/heat/Schrodinger propagators, resolvent
powers, Bochner-Riesz means and spectral windows; the semigroup-transform
identity that rebuilds F(sqrt(L)) from complex-time heat operators; the
dyadic square functional; and the continuum radial calculus (synthesis /
analysis pair, Plancherel calibration, resolvent kernel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .models import ContinuumRadialModel, HermiteModel2D, SpectralModel, interval_kernel
from .mult import MultiplierFn, fourier_at


@dataclass
class LinearOperator:
    """Spectral operator on a model: per-mode symbol plus metadata.

    support_radius is the declared kernel-support radius inherited from the
    Fourier support of the generating multiplier (finite speed propagation);
    None when nothing is claimed.
    """

    model: object
    symbol: np.ndarray
    label: str = ""
    support_radius: float | None = None

    @property
    def space(self):
        return self.model.space if not isinstance(self.model, ContinuumRadialModel) else self.model.space()

    def apply(self, f):
        return self.model.apply(self.symbol, f)

    def kernel_column(self, j: int):
        return self.model.kernel_column(self.symbol, j)

    def dense_kernel(self):
        if isinstance(self.model, SpectralModel) and self.model.kind == "dense" \
                and self.model.space.geometry_tag == "interval" \
                and self.model.name.startswith("interval"):
            return interval_kernel(self.model, self.symbol)
        return self.model.dense_kernel(self.symbol)

    def compose(self, other: "LinearOperator") -> "LinearOperator":
        if other.model is not self.model:
            raise ValueError("composition requires a shared model")
        rad = None
        if self.support_radius is not None and other.support_radius is not None:
            rad = self.support_radius + other.support_radius
        return LinearOperator(
            model=self.model,
            symbol=self.symbol * other.symbol,
            label=f"{self.label}*{other.label}",
            support_radius=rad,
        )

    def norm_2(self) -> float:
        """||.||_{2->2} = max |symbol| on the retained spectrum."""
        return float(np.max(np.abs(self.symbol)))


# ---------------------------------------------------------------------------
# Spectral constructors
# ---------------------------------------------------------------------------

def apply_multiplier_sqrt(model, F: MultiplierFn) -> LinearOperator:
    """F(sqrt(L)): symbol lam_of_L -> F(sqrt(lam))."""
    lam_top = math.sqrt(max(model.eigenvalues[-1], 0.0))
    if F.fn is None and F.lam_max < lam_top - 1e-12:
        raise ValueError(
            f"multiplier grid reaches {F.lam_max:g} < sqrt(lam_max) = {lam_top:g}"
        )
    sym = model.symbol(lambda lam: F(np.sqrt(np.maximum(lam, 0.0))))
    return LinearOperator(
        model=model, symbol=sym, label=F.label or "F(sqrtL)",
        support_radius=F.fourier_support if math.isfinite(F.fourier_support) else None,
    )


def wave(model, t: float) -> LinearOperator:
    """cos(t sqrt(L)); kernel supported in D_t up to spectral truncation."""
    if t < 0:
        raise ValueError("wave time must be nonnegative")
    sym = model.symbol(lambda lam: np.cos(t * np.sqrt(np.maximum(lam, 0.0))))
    return LinearOperator(model=model, symbol=sym, label=f"cos({t:g} sqrtL)",
                          support_radius=t if t > 0 else None)


def heat(model, z) -> LinearOperator:
    """exp(-z L) for Re z >= 0 (complex z allowed; L^2 contraction)."""
    z = complex(z)
    if z.real < 0:
        raise ValueError("heat parameter must have Re z >= 0")
    sym = model.symbol(lambda lam: np.exp(-z * lam))
    if abs(z.imag) == 0.0:
        sym = sym.real if hasattr(sym, "real") else sym
    return LinearOperator(model=model, symbol=sym, label=f"exp(-{z} L)")


def schrodinger(model, s: float) -> LinearOperator:
    return heat(model, 1j * s)


def resolvent_power(model, t: float, N: int) -> LinearOperator:
    """(I + t sqrt(L))^{-N}."""
    if t <= 0 or N < 1:
        raise ValueError("need t > 0 and N >= 1")
    sym = model.symbol(lambda lam: (1.0 + t * np.sqrt(np.maximum(lam, 0.0))) ** (-float(N)))
    return LinearOperator(model=model, symbol=sym, label=f"(1+{t:g} sqrtL)^-{N}")


def bochner_riesz(model, R: float, delta: float) -> LinearOperator:
    """S_R^delta(L) = (I - L/R^2)_+^delta; delta = 0 is E_{sqrtL}[0, R]."""
    if R <= 0:
        raise ValueError("R must be positive")

    def g(lam):
        base = 1.0 - np.asarray(lam, dtype=float) / R**2
        out = np.zeros_like(base)
        pos = base > 0
        out[pos] = base[pos] ** delta
        return out

    return LinearOperator(model=model, symbol=model.symbol(g),
                          label=f"S_{R:g}^{delta:g}")


def spectral_window(model, a: float, b: float) -> LinearOperator:
    """E_{sqrt(L)}[a, b): indicator window in the sqrt(L) variable."""

    def g(lam):
        s = np.sqrt(np.maximum(np.asarray(lam, dtype=float), 0.0))
        return ((s >= a) & (s < b)).astype(float)

    return LinearOperator(model=model, symbol=model.symbol(g),
                          label=f"E[{a:g},{b:g})")


def spectral_window_l(model, a: float, b: float) -> LinearOperator:
    """E_L[a, b): indicator window in the L variable (unit cluster windows)."""

    def g(lam):
        lam = np.asarray(lam, dtype=float)
        return ((lam >= a) & (lam < b)).astype(float)

    return LinearOperator(model=model, symbol=model.symbol(g),
                          label=f"E_L[{a:g},{b:g})")


# ---------------------------------------------------------------------------
# Finite speed propagation measurements
# ---------------------------------------------------------------------------

def offdiagonal_mass(op: LinearOperator, rho: float):
    """(mass of |K| outside D_rho, total mass) against mu x mu."""
    model = op.model
    space = op.space
    if isinstance(model, SpectralModel) and model.kind == "conv1d":
        st = np.abs(op.model.stencil(op.symbol))
        d = space.dist_from(0)
        cell = space.total_mass / space.npoints
        per_col = (st * cell).sum()
        out_col = (st[d > rho] * cell).sum()
        return float(out_col * space.total_mass), float(per_col * space.total_mass)
    if isinstance(model, SpectralModel) and model.kind == "conv2d":
        st = np.abs(op.model.stencil(op.symbol)).reshape(-1)
        d = space.dist_from(0)
        cell = space.total_mass / space.npoints
        per_col = (st * cell).sum()
        out_col = (st.ravel()[d > rho] * cell).sum()
        return float(out_col * space.total_mass), float(per_col * space.total_mass)
    if isinstance(model, SpectralModel) and space.geometry_tag == "interval":
        return _interval_offdiag_mass(model, op.symbol, rho)
    # generic dense fallback
    w = space.weights
    out = tot = 0.0
    for j in range(space.npoints):
        col = np.abs(op.kernel_column(j)) * w * w[j]
        d = space.dist_from(j)
        tot += col.sum()
        out += col[d > rho].sum()
    return float(out), float(tot)


def _interval_offdiag_mass(model: SpectralModel, symbol, rho: float, block: int = 512):
    """Blocked evaluation of the interval kernel mass via the image split."""
    n = model.space.npoints
    pts = model.space.points
    h = pts[1] - pts[0]
    k = np.sqrt(model.eigenvalues)
    m_diff = np.arange(-(n - 1), n) * h
    m_sum = np.arange(1, 2 * n) * h
    s_diff = np.cos(np.outer(m_diff, k)) @ symbol
    s_sum = np.cos(np.outer(m_sum, k)) @ symbol
    i = np.arange(n)
    out = tot = 0.0
    for j0 in range(0, n, block):
        j = np.arange(j0, min(j0 + block, n))
        kern = np.abs(
            s_diff[i[:, None] - j[None, :] + (n - 1)] - s_sum[i[:, None] + j[None, :]]
        ) / math.pi
        dist = np.abs(pts[:, None] - pts[None, j])
        tot += kern.sum() * h * h
        out += kern[dist > rho].sum() * h * h
    return float(out), float(tot)


def finite_speed_report(model, F: MultiplierFn, rho: float, slack: float = 0.05):
    """Relative kernel mass of F(sqrt(L)) outside D_{rho (1+slack)}."""
    op = apply_multiplier_sqrt(model, F)
    out, tot = offdiagonal_mass(op, rho * (1.0 + slack))
    return out / tot if tot > 0 else 0.0


# ---------------------------------------------------------------------------
# Semigroup-transform identity
# ---------------------------------------------------------------------------

@dataclass
class TransferenceReport:
    discrepancy: float  # relative kernel discrepancy, two routes
    tail_estimate: float
    xi_truncation: float
    quadrature_step: float


def transference_symbol(
    model,
    F: MultiplierFn,
    xi_truncation: float,
    quadrature_step: float,
    mu_step: float = 5e-4,
    rule: str = "onesided",
):
    """Quadrature route for F(sqrt(L)) via complex-time heat operators.

    With R the support radius of F, G(mu) = F(R sqrt(mu)) e^mu on [0, 1] and
    F(sqrt(lam)) = e^{-mu} (1/2pi) int Ghat(xi) e^{i xi mu} dxi at
    mu = lam / R^2.  Returns (direct symbol, quadrature symbol, tail est).
    """
    R = F.support_radius
    if not math.isfinite(R):
        raise ValueError("transference needs a compactly supported multiplier")
    mu = (np.arange(int(round(1.0 / mu_step))) + 0.5) * mu_step
    g = F(R * np.sqrt(mu)) * np.exp(mu)

    lam = np.asarray(model.eigenvalues, dtype=float)
    if isinstance(model, SpectralModel) and model.convolutional:
        lam_modes = model.lattice_absfreq**2
    else:
        lam_modes = lam
    uniq, inverse = np.unique(np.round(lam_modes.ravel(), 9), return_inverse=True)
    mu_uniq = uniq / R**2

    T, h = float(xi_truncation), float(quadrature_step)
    if rule == "onesided":
        xi = np.arange(0.0, T, h)  # left endpoints: first-order rule
    elif rule == "midpoint":
        xi = np.arange(-T, T, h) + h / 2.0
    else:
        raise ValueError(f"unknown rule {rule!r}")

    # Ghat on the uniform xi grid via the chirp-z transform:
    # Ghat(xi_j) = mu_step * sum_i g_i exp(-i xi_j mu_i), mu_i = (i + 1/2) mu_step
    from scipy.signal import czt

    # czt gives X_j = sum_n x_n a^{-n} w^{jn}; match e^{-i xi_j mu_step n}
    a = np.exp(1j * xi[0] * mu_step)
    wz = np.exp(-1j * h * mu_step)
    ghat = mu_step * np.exp(-1j * xi * mu_step / 2.0) * czt(
        g.astype(complex), m=len(xi), w=wz, a=a
    )

    tail_sel = np.abs(xi) > 0.9 * T
    tail_edge = float(np.abs(ghat[tail_sel]).mean()) if tail_sel.any() else 0.0

    quad_u = np.zeros(len(uniq))
    chunk = 65536
    for i0 in range(0, len(xi), chunk):
        xic = xi[i0 : i0 + chunk]
        phase = np.exp(1j * np.outer(mu_uniq, xic))
        quad_u += np.real(phase @ ghat[i0 : i0 + chunk]) * h
    if rule == "onesided":
        quad_u *= 2.0 / (2.0 * math.pi)
    else:
        quad_u /= 2.0 * math.pi
    quad_u = quad_u * np.exp(-mu_uniq)

    # tail estimate: |Ghat| ~ a (T/xi)^m with m >= 2 gives int_T^inf <= a T
    tail_rel = tail_edge * T / (2.0 * math.pi) / (
        np.max(np.abs(F(np.sqrt(np.maximum(lam, 0.0))))) + 1e-300
    )
    quad = quad_u[inverse].reshape(lam_modes.shape)
    direct = F(np.sqrt(np.maximum(lam_modes, 0.0)))
    return direct, quad, float(tail_rel)


def transference_check(
    model,
    F: MultiplierFn,
    xi_truncation: float = 200.0,
    quadrature_step: float = 1e-3,
    mu_step: float = 2e-4,
    tolerance: float = 0.05,
    rule: str = "onesided",
) -> TransferenceReport:
    """Compare the direct spectral route with the quadrature route.

    The discrepancy is the relative sup-norm distance of the two kernels.
    Raises when the reported Fourier-tail estimate exceeds `tolerance`.
    """
    direct, quad, tail = transference_symbol(
        model, F, xi_truncation, quadrature_step, mu_step=mu_step, rule=rule
    )
    if tail > tolerance:
        raise ValueError(
            f"xi-truncation {xi_truncation:g} insufficient: tail estimate {tail:.2e}; "
            f"increase the truncation"
        )
    if isinstance(model, SpectralModel) and model.convolutional:
        sym_d = np.where(model.lattice_mask, direct, 0.0)
        sym_q = np.where(model.lattice_mask, quad, 0.0)
        st_d = model.stencil(sym_d)
        st_e = model.stencil(sym_q - sym_d)
        disc = float(np.max(np.abs(st_e)) / np.max(np.abs(st_d)))
    else:
        op_d = LinearOperator(model, direct)
        op_e = LinearOperator(model, quad - direct)
        kd = op_d.dense_kernel()
        ke = op_e.dense_kernel()
        disc = float(np.max(np.abs(ke)) / np.max(np.abs(kd)))
    return TransferenceReport(
        discrepancy=disc,
        tail_estimate=tail,
        xi_truncation=xi_truncation,
        quadrature_step=quadrature_step,
    )


# ---------------------------------------------------------------------------
# Square functional
# ---------------------------------------------------------------------------

def quadratic_functional(model, psi: MultiplierFn, f, j_range):
    """G_L f = (sum_{j in j_range} |psi(2^j sqrt(L)) f|^2)^{1/2}.

    psi(0) must vanish.  Returns (values on the grid, truncation tail bound:
    the sup over the retained spectrum of the symbol mass outside j_range).
    """
    if abs(psi(0.0)) > 1e-12:
        raise ValueError("square-functional window must vanish at 0")
    total = None
    for j in j_range:
        sym = model.symbol(
            lambda lam, _j=j: psi(2.0**_j * np.sqrt(np.maximum(lam, 0.0)))
        )
        piece = np.abs(model.apply(sym, f)) ** 2
        total = piece if total is None else total + piece
    ext = range(min(j_range) - 8, max(j_range) + 9)
    lam_s = np.sqrt(np.maximum(np.asarray(model.eigenvalues, dtype=float), 0.0))
    inside = sum(np.abs(psi(2.0**j * lam_s)) ** 2 for j in j_range)
    full = sum(np.abs(psi(2.0**j * lam_s)) ** 2 for j in ext)
    tail = float(np.max(full - inside))
    return np.sqrt(np.maximum(total, 0.0)), tail


def square_symbol_sup(model, psi: MultiplierFn, j_range) -> float:
    """sup over the retained spectrum of sum_j |psi(2^j sqrt(lam))|^2."""
    lam_s = np.sqrt(np.maximum(np.asarray(model.eigenvalues, dtype=float), 0.0))
    total = sum(np.abs(psi(2.0**j * lam_s)) ** 2 for j in j_range)
    return float(np.max(total))


def lemma45_gap(model, symbols, fs) -> tuple[float, float]:
    """(lhs, rhs) of || sum_k Q_k(sqrtL) f_k ||_2^2 <= C sum ||f_k||_2^2
    with C the measured symbol sup of sum |Q_k|^2 on the retained spectrum."""
    w = model.space.weights
    acc = None
    rhs = 0.0
    csup = np.zeros_like(np.asarray(model.eigenvalues, dtype=float))
    for sym_fn, f in zip(symbols, fs):
        sym = model.symbol(sym_fn)
        if isinstance(model, SpectralModel) and model.convolutional:
            lam = model.eigenvalues
            csup = csup + np.abs(np.asarray(sym_fn(lam))) ** 2
        else:
            csup = csup + np.abs(sym) ** 2
        out = model.apply(sym, f)
        acc = out if acc is None else acc + out
        rhs += float((w * np.abs(f) ** 2).sum())
    lhs = float((w * np.abs(acc) ** 2).sum())
    return lhs, float(np.max(csup)) * rhs


# ---------------------------------------------------------------------------
# Continuum radial calculus
# ---------------------------------------------------------------------------

def hankel_analysis(cmodel: ContinuumRadialModel, f) -> np.ndarray:
    """A f(lam) = int ell(lam y) f(y) y^{n-1} dy on the lambda grid."""
    return cmodel.ell_table @ (cmodel.x_w * np.asarray(f))


def hankel_synthesis(cmodel: ContinuumRadialModel, g) -> np.ndarray:
    """S g(x) = c_star int g(lam) ell(lam x) lam^{n-1} dlam on the x grid."""
    return cmodel.c_star * (cmodel.ell_table.T @ (cmodel.lam_w * np.asarray(g)))


def hankel_apply(cmodel: ContinuumRadialModel, F: MultiplierFn, f) -> np.ndarray:
    """F(sqrt(L)) f by tensor quadrature through the radial transform pair."""
    if F.support_radius > cmodel.lam_max * (1.0 + 1e-9):
        raise ValueError(
            f"multiplier support {F.support_radius:g} exceeds the spectral window "
            f"{cmodel.lam_max:g}"
        )
    g = hankel_analysis(cmodel, f)
    return hankel_synthesis(cmodel, F(cmodel.lam_grid) * g)


def calibrate_cstar(cmodel: ContinuumRadialModel, center: float | None = None,
                    width: float | None = None) -> float:
    """Fix c_star with one reference Gaussian so the Plancherel identity is
    exact for it; later defects are genuine measurements."""
    lam = cmodel.lam_grid
    c0 = center if center is not None else 0.45 * cmodel.lam_max
    s0 = width if width is not None else 0.06 * cmodel.lam_max
    g = np.exp(-((lam - c0) ** 2) / (2.0 * s0**2))
    lhs = float((cmodel.x_w * (cmodel.ell_table.T @ (cmodel.lam_w * g)) ** 2).sum())
    rhs = float((cmodel.lam_w * g**2).sum())
    cmodel.c_star = rhs / lhs
    return cmodel.c_star


def hankel_plancherel_check(cmodel: ContinuumRadialModel, multipliers) -> float:
    """Max relative Plancherel defect over a family of lambda-profiles.

    defect(F) = |c_star ||T F||^2_{x} - ||F||^2_{lam}| / ||F||^2_{lam}.
    """
    worst = 0.0
    for F in multipliers:
        g = F(cmodel.lam_grid) if callable(F) else np.asarray(F)
        lhs = cmodel.c_star * float(
            (cmodel.x_w * (cmodel.ell_table.T @ (cmodel.lam_w * g)) ** 2).sum()
        )
        rhs = float((cmodel.lam_w * g**2).sum())
        worst = max(worst, abs(lhs - rhs) / rhs)
    return worst


def radial_resolvent_kernel(
    params: specfun.InverseSquareParams, lam: float, x, y, nu: float = 1.0
):
    """Resolvent kernel of (L + lam^2)^{-1}: nu lam^{n-2} k(lam y) l(lam x)
    for y >= x, symmetric continuation otherwise (modified-Bessel pair)."""
    if lam <= 0:
        raise ValueError("resolvent kernel defined for lam > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    ell = specfun.scattering_l_modified(params, lam * lo)
    kk = specfun.scattering_k(params, lam * hi)
    out = nu * lam ** (params.n - 2.0) * ell * kk
    return out if out.ndim else float(out)


def radial_resolvent_residual(
    galerkin: SpectralModel,
    params: specfun.InverseSquareParams,
    lam: float,
    f: np.ndarray,
    calibrate_nu: bool = True,
):
    """||(L_gal + lam^2) R f - f||_2 / ||f||_2 with R from the kernel formula.

    Returns (residual, nu): nu is least-squares calibrated when requested.
    """
    space = galerkin.space
    x = space.points
    kern = radial_resolvent_kernel(params, lam, x[:, None], x[None, :])
    rf = kern @ (space.weights * f)
    # apply (L + lam^2) spectrally on the Galerkin model
    coeff = galerkin.eigenfunctions @ (space.weights * rf)
    lrf = ((galerkin.eigenvalues + lam**2) * coeff) @ galerkin.eigenfunctions
    if calibrate_nu:
        num = float((space.weights * lrf * f).sum())
        den = float((space.weights * lrf * lrf).sum())
        nu = num / den
    else:
        nu = 1.0
    resid = space.lp_norm(nu * lrf - f, 2.0) / space.lp_norm(f, 2.0)
    return float(resid), float(nu)
