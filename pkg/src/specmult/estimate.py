"""Operator norms on weighted spaces and the condition scanners.

Norms are exact for (1 -> q) and (2 -> 2) on the atomic measure; other
(p, q) pairs come as certified brackets: duality-ascent lower bounds and
endpoint-interpolation upper bounds.  Scanners sweep (ball, scale, F)
grids for each named condition and report per-record ratios, the sup and
a log-log trend slope.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import calculus as calc
from .models import ContinuumRadialModel, HermiteModel2D, SpectralModel
from .mult import MultiplierFn, critical_exponent, nq_norm, scale as scale_mult
from .space import Ball, volume


# ---------------------------------------------------------------------------
# Kernel access helpers
# ---------------------------------------------------------------------------

def kernel_columns(op: calc.LinearOperator, cols) -> np.ndarray:
    """Materialize kernel columns K(., y_j) for j in cols, shape (N, len(cols))."""
    model = op.model
    cols = np.asarray(cols, dtype=int)
    if isinstance(model, SpectralModel) and model.kind == "conv1d":
        st = model.stencil(op.symbol)
        n = len(st)
        idx = (np.arange(n)[:, None] - cols[None, :]) % n
        return st[idx]
    if isinstance(model, SpectralModel) and model.kind == "conv2d":
        st = model.stencil(op.symbol)
        side = st.shape[0]
        i1, i2 = np.divmod(np.arange(side * side), side)
        j1, j2 = np.divmod(cols, side)
        return st[(i1[:, None] - j1[None, :]) % side, (i2[:, None] - j2[None, :]) % side]
    if isinstance(model, SpectralModel) and model.kind == "dense":
        phi = model.eigenfunctions
        return (phi.T * op.symbol) @ phi[:, cols]
    out = np.empty((op.space.npoints, len(cols)))
    for k, j in enumerate(cols):
        out[:, k] = op.kernel_column(int(j)).real
    return out


# ---------------------------------------------------------------------------
# Exact norms
# ---------------------------------------------------------------------------

def norm_1_to_q(op: calc.LinearOperator, q: float, cols=None) -> float:
    """||T P_cols||_{1->q} = max_{y in cols} || K(., y) ||_{L^q(mu)}; exact."""
    model = op.model
    space = op.space
    w = space.weights
    if cols is None:
        cols = np.arange(space.npoints)
    else:
        cols = np.asarray(cols, dtype=int)
        if cols.dtype == bool:
            cols = np.flatnonzero(cols)
    if isinstance(model, SpectralModel) and model.convolutional:
        col = op.kernel_column(int(cols[0])).real.ravel()
        if q == math.inf:
            return float(np.max(np.abs(col)))
        return float(((w * np.abs(col) ** q).sum()) ** (1.0 / q))
    if isinstance(model, HermiteModel2D) and q == 2:
        prof = model.square_profile(np.abs(op.symbol) ** 2)
        return float(np.sqrt(np.max(prof[cols])))
    best = 0.0
    block = max(1, int(2**22 // max(space.npoints, 1)))
    for j0 in range(0, len(cols), block):
        kb = kernel_columns(op, cols[j0 : j0 + block])
        if q == math.inf:
            best = max(best, float(np.max(np.abs(kb))))
        else:
            best = max(best, float(np.max((w[:, None] * np.abs(kb) ** q).sum(axis=0)) ** (1.0 / q)))
    return best


def norm_2_to_2(op: calc.LinearOperator) -> float:
    """Spectral norm: sup of |symbol| on the retained spectrum (exact)."""
    return op.norm_2()


def norm_2_to_2_restricted(op: calc.LinearOperator, cols) -> float:
    """||T P_cols||_{2->2}: top singular value of the weighted column block."""
    space = op.space
    cols = np.asarray(cols)
    if cols.dtype == bool:
        cols = np.flatnonzero(cols)
    if len(cols) == 0:
        return 0.0
    if len(cols) * space.npoints > 2**26:
        raise MemoryError("restricted 2->2 block too large; use a coarser scan")
    kb = kernel_columns(op, cols)
    w = space.weights
    m = np.sqrt(w)[:, None] * kb * np.sqrt(w[cols])[None, :]
    return float(np.linalg.svd(m, compute_uv=False)[0])


def norm_kernel_2_to_2(kernel: np.ndarray, w: np.ndarray) -> float:
    """Weighted spectral norm of an explicit kernel matrix."""
    m = np.sqrt(w)[:, None] * kernel * np.sqrt(w)[None, :]
    return float(np.linalg.svd(m, compute_uv=False)[0])


def norm_p_to_p(op: calc.LinearOperator, p: float, cols=None) -> float:
    """Exact for p in {1, 2, inf}; bracket lower bound otherwise."""
    if p == 1.0:
        return _col_sums_max(op, cols)
    if p == math.inf:
        return _col_sums_max(op, cols)  # self-adjoint real kernels: rows = cols
    if p == 2.0:
        if cols is None:
            return norm_2_to_2(op)
        return norm_2_to_2_restricted(op, cols)
    return bracket_p_to_p(op, p, cols=cols).lower


def bracket_p_to_p(op: calc.LinearOperator, p: float, cols=None, seed: int = 7
                   ) -> OperatorNormBracket:
    """Certified interval for ||T||_{p->p}, 1 < p < 2: ascent lower bound and
    the interpolation upper bound between the exact 1->1 and 2->2 norms."""
    if not 1.0 < p < 2.0:
        raise ValueError("bracket_p_to_p covers 1 < p < 2")
    theta = 2.0 * (1.0 - 1.0 / p)
    n1 = _col_sums_max(op, cols)
    n2 = norm_2_to_2(op) if cols is None else norm_2_to_2_restricted(op, cols)
    upper = n1 ** (1.0 - theta) * n2**theta
    lower, conv = duality_ascent(op, p, p, cols=cols, seed=seed)
    lower = min(lower, upper)
    return OperatorNormBracket(
        lower, upper, p, p, ("duality-ascent", "interpolation"), converged=conv
    )


def _col_sums_max(op: calc.LinearOperator, cols=None) -> float:
    space = op.space
    w = space.weights
    if cols is None:
        cols = np.arange(space.npoints)
    else:
        cols = np.asarray(cols)
        if cols.dtype == bool:
            cols = np.flatnonzero(cols)
    if isinstance(op.model, SpectralModel) and op.model.convolutional:
        col = op.kernel_column(int(cols[0])).real.ravel()
        return float((w * np.abs(col)).sum())
    best = 0.0
    block = max(1, int(2**22 // max(space.npoints, 1)))
    for j0 in range(0, len(cols), block):
        kb = kernel_columns(op, cols[j0 : j0 + block])
        best = max(best, float(np.max((w[:, None] * np.abs(kb)).sum(axis=0))))
    return best


# ---------------------------------------------------------------------------
# Duality-ascent bracket
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorNormBracket:
    lower: float
    upper: float
    p: float
    q: float
    methods: tuple
    converged: bool = True

    @property
    def width(self) -> float:
        if self.upper == 0.0:
            return 0.0
        return (self.upper - self.lower) / self.upper

    def __post_init__(self):
        if self.lower > self.upper * (1.0 + 1e-9):
            raise AssertionError(
                f"bracket inconsistency: lower {self.lower!r} > upper {self.upper!r}"
            )


def _dual_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def _dual_vector(g: np.ndarray, q: float, w: np.ndarray) -> np.ndarray:
    """Unit-L^{q'} vector pairing maximally with g."""
    a = np.abs(g)
    nq_val = (w * a**q).sum() ** (1.0 / q)
    if nq_val == 0.0:
        return g
    return np.sign(g) * (a / nq_val) ** (q - 1.0)


def _seed_vectors(op: calc.LinearOperator, cols, n_random: int, seed: int):
    space = op.space
    n = space.npoints
    mask = np.zeros(n, dtype=bool)
    mask[cols] = True
    seeds = []
    col_norms = (space.weights[:, None] * np.abs(kernel_columns(op, cols[: min(len(cols), 512)]))).sum(axis=0)
    best = cols[int(np.argmax(col_norms))]
    spike = np.zeros(n)
    spike[best] = 1.0
    seeds.append(spike)
    seeds.append(mask.astype(float))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        v = rng.standard_normal(n) * mask
        seeds.append(v)
    return seeds


def duality_ascent(
    op: calc.LinearOperator,
    p: float,
    q: float,
    cols=None,
    max_iter: int = 200,
    n_random: int = 8,
    seed: int = 7,
):
    """Lower bound for ||T P_cols||_{p->q} by nonlinear power iteration.

    Iterates f <- unit-p dual of T*(unit-q' dual of T f), seeded by the
    heaviest kernel column, the indicator of the column set, and fixed-seed
    random starts.  Returns (value, converged_flag).
    """
    space = op.space
    w = space.weights
    if cols is None:
        cols = np.arange(space.npoints)
    else:
        cols = np.asarray(cols)
        if cols.dtype == bool:
            cols = np.flatnonzero(cols)
    mask = np.zeros(space.npoints, dtype=bool)
    mask[cols] = True
    is_real = not np.iscomplexobj(op.symbol)
    conj = np.conj(op.symbol)

    def fwd(f):
        out = op.model.apply(op.symbol, f)
        return np.real(out) if is_real else out

    def adj(f):
        out = op.model.apply(conj, f)
        return np.real(out) if is_real else out

    pp = _dual_exponent(p)
    best_val, all_conv = 0.0, True
    for f0 in _seed_vectors(op, cols, n_random, seed):
        f = f0 * mask
        nrm = (w * np.abs(f) ** p).sum() ** (1.0 / p)
        if nrm == 0.0:
            continue
        f = f / nrm
        prev = -1.0
        converged = False
        for _ in range(max_iter):
            g = fwd(f)
            val = float((w * np.abs(g) ** q).sum() ** (1.0 / q))
            best_val = max(best_val, val)
            if val == 0.0 or abs(val - prev) <= 1e-10 * max(val, 1e-300):
                converged = True
                break
            prev = val
            phi = _dual_vector(g, q, w)
            u = adj(phi) * mask
            f = _dual_vector(u, pp, w)
            nrm = (w * np.abs(f) ** p).sum() ** (1.0 / p)
            if nrm == 0.0:
                break
            f = f / nrm
        all_conv = all_conv and converged
    return best_val, all_conv


def bracket(
    op: calc.LinearOperator, p: float, q: float, cols=None, seed: int = 7
) -> OperatorNormBracket:
    """Certified interval for ||T P_cols||_{p->q}, 1 <= p <= 2 <= q <= inf."""
    if not (1.0 <= p <= 2.0 <= q):
        raise ValueError("bracket supports 1 <= p <= 2 <= q")
    if p == 1.0:
        v = norm_1_to_q(op, q, cols)
        return OperatorNormBracket(v, v, p, q, ("exact-column",))
    if p == 2.0 and q == 2.0:
        v = norm_2_to_2(op) if cols is None else norm_2_to_2_restricted(op, cols)
        return OperatorNormBracket(v, v, p, q, ("exact-svd",))
    theta = 2.0 * (1.0 - 1.0 / p)
    inv_q = 0.0 if q == math.inf else 1.0 / q
    if inv_q < theta / 2.0 - 1e-12:
        raise ValueError(f"interpolation route needs q <= p' (p={p}, q={q})")
    denom = 1.0 - theta
    inv_qa = (inv_q - theta / 2.0) / denom if denom > 0 else 0.0
    qa = math.inf if inv_qa <= 1e-14 else 1.0 / inv_qa
    n1 = norm_1_to_q(op, qa, cols)
    n2 = norm_2_to_2(op) if cols is None else norm_2_to_2_restricted(op, cols)
    upper = n1 ** (1.0 - theta) * n2**theta
    lower, conv = duality_ascent(op, p, q, cols=cols, seed=seed)
    lower = min(lower, upper)  # ascent can only undershoot; guard roundoff
    return OperatorNormBracket(
        lower, upper, p, q, ("duality-ascent", "interpolation"), converged=conv
    )


def norm_p_to_s_restricted(op: calc.LinearOperator, mask, p: float, s: float) -> float:
    """Dispatch used by the net-decomposition ratio: exact pairs or bracket lower."""
    cols = np.flatnonzero(mask) if np.asarray(mask).dtype == bool else np.asarray(mask)
    if p == 1.0:
        return norm_1_to_q(op, s, cols)
    if p == 2.0 and s == 2.0:
        return norm_2_to_2_restricted(op, cols)
    return bracket(op, p, s, cols=cols).lower


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ScanRecord:
    ball_center: int
    r: float
    scale: float
    f_id: str
    lhs: float
    rhs: float
    ratio: float
    bracket_width: float = 0.0
    flagged: bool = False


@dataclass
class TrendFit:
    slope: float
    stderr: float
    npoints: int


@dataclass
class ConditionReport:
    condition: str
    model: str
    params: dict
    records: list
    sup_ratio: float = 0.0
    trend: TrendFit | None = None
    skipped: int = 0
    notes: dict = field(default_factory=dict)

    def finalize(self) -> "ConditionReport":
        ok = [r for r in self.records if not r.flagged]
        if any(r.rhs <= 0 for r in self.records):
            raise AssertionError("every scan record must have a positive rhs")
        self.sup_ratio = max((r.ratio for r in self.records), default=0.0)
        by_scale: dict[float, float] = {}
        for r in ok:
            by_scale[r.scale] = max(by_scale.get(r.scale, 0.0), r.ratio)
        if len(by_scale) >= 3:
            xs = np.log(np.array(sorted(by_scale)))
            ys = np.log(np.array([by_scale[s] for s in sorted(by_scale)]))
            a, b = np.polyfit(xs, ys, 1)
            resid = ys - (a * xs + b)
            dof = max(len(xs) - 2, 1)
            sxx = float(((xs - xs.mean()) ** 2).sum())
            stderr = math.sqrt(float((resid**2).sum()) / dof / sxx) if sxx > 0 else math.nan
            self.trend = TrendFit(slope=float(a), stderr=stderr, npoints=len(xs))
        return self

    def csv_rows(self):
        p = self.params
        for r in self.records:
            yield {
                "condition": self.condition,
                "model": self.model,
                "p": p.get("p", ""),
                "s": p.get("s", ""),
                "q": p.get("q", ""),
                "kappa": p.get("kappa", ""),
                "ball_center": r.ball_center,
                "r": r.r,
                "scale": r.scale,
                "F_id": r.f_id,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "ratio": r.ratio,
                "bracket_width": r.bracket_width,
            }


CSV_COLUMNS = [
    "condition", "model", "p", "s", "q", "kappa", "ball_center", "r",
    "scale", "F_id", "lhs", "rhs", "ratio", "bracket_width",
]


def _stable_seed(*parts) -> int:
    return zlib.crc32(":".join(str(p) for p in parts).encode())


def _restricted_norm(op, cols, p, s, seed):
    """(value, bracket_width) for ||T P_cols||_{p->s} per the scan policy."""
    if p == 1.0:
        return norm_1_to_q(op, s, cols), 0.0
    if p == 2.0 and s == 2.0:
        return norm_2_to_2_restricted(op, cols), 0.0
    br = bracket(op, p, s, cols=cols, seed=seed)
    return br.lower, br.width


# ---------------------------------------------------------------------------
# Restriction-type scans
# ---------------------------------------------------------------------------

def st_scan(model, p, s, q, ball_grid, R_grid, F_family) -> ConditionReport:
    """Stein-Tomas type scan: ratio of ||F(sqrtL) P_B||_{p->s} to
    V^{1/s-1/p} (R r)^{n(1/p-1/s)} ||delta_R F||_q over (ball, R, profile).

    F_family entries are (id, profile) with the profile supported in [0, 1];
    the scanned multiplier at scale R is profile(./R).
    """
    space = model.space
    n = space.doubling_dim
    report = ConditionReport(
        condition=f"ST^{q:g}_{{{p:g},{s:g}}}", model=model.name,
        params=dict(p=p, s=s, q=q), records=[],
    )
    for R in R_grid:
        for f_id, profile in F_family:
            F = scale_mult(profile, 1.0 / R)
            rhs_norm = profile.l_q(q)
            op = calc.apply_multiplier_sqrt(model, F)
            for center, r in ball_grid:
                if r < 1.0 / R:
                    report.skipped += 1
                    continue
                mask = space.ball_mask(Ball(center, r))
                cols = np.flatnonzero(mask)
                if len(cols) == 0:
                    report.skipped += 1
                    continue
                seed = _stable_seed("st", model.name, p, s, q, R, f_id, center, r)
                lhs, width = _restricted_norm(op, cols, p, s, seed)
                v = float(space.weights[cols].sum())
                rhs = v ** (1.0 / s - 1.0 / p) * (R * r) ** (n * (1.0 / p - 1.0 / s)) * rhs_norm
                report.records.append(
                    ScanRecord(center, float(r), float(R), f_id, lhs, rhs,
                               lhs / rhs, width, width > 0.25)
                )
    return report.finalize()


def sc_scan(model, p, s, q, kappa, N_grid, ball_grid, F_family) -> ConditionReport:
    """Cluster-normed variant: rhs uses ||delta_N F||_{N^kappa, q}."""
    space = model.space
    n = space.doubling_dim
    report = ConditionReport(
        condition=f"SC^{q:g},{kappa:g}_{{{p:g},{s:g}}}", model=model.name,
        params=dict(p=p, s=s, q=q, kappa=kappa), records=[],
    )
    for N in N_grid:
        for f_id, profile in F_family:
            F = scale_mult(profile, 1.0 / N)
            rhs_norm = nq_norm(profile, int(round(N**kappa)), q)
            op = calc.apply_multiplier_sqrt(model, F)
            for center, r in ball_grid:
                if r < 1.0 / N:
                    report.skipped += 1
                    continue
                mask = space.ball_mask(Ball(center, r))
                cols = np.flatnonzero(mask)
                if len(cols) == 0:
                    report.skipped += 1
                    continue
                seed = _stable_seed("sc", model.name, p, s, q, kappa, N, f_id, center, r)
                lhs, width = _restricted_norm(op, cols, p, s, seed)
                v = float(space.weights[cols].sum())
                rhs = v ** (1.0 / s - 1.0 / p) * (N * r) ** (n * (1.0 / p - 1.0 / s)) * rhs_norm
                report.records.append(
                    ScanRecord(center, float(r), float(N), f_id, lhs, rhs,
                               lhs / rhs, width, width > 0.25)
                )
    return report.finalize()


def sogge_scan(model, p, k_max, window: str = "sqrtL") -> ConditionReport:
    """Unit spectral-window scan.

    window="sqrtL": E_{sqrtL}[k, k+1) against (1+k)^{n(1/p-1/p')-1} in
    p -> p' (the compact cluster condition).
    window="L": E_L[k, k+1) against (1+sqrt(k))^{n(1/p-1/2)-1} in p -> 2
    (the oscillator cluster estimate).  Empty windows are skipped.
    """
    space = model.space
    n = space.doubling_dim
    pprime = _dual_exponent(p)
    tag = "S_p" if window == "sqrtL" else "S_p[L]"
    report = ConditionReport(
        condition=tag, model=model.name,
        params=dict(p=p, s=(pprime if window == "sqrtL" else 2), q="", kappa=""),
        records=[],
    )
    lam = np.asarray(model.eigenvalues, dtype=float)
    for k in range(0, int(k_max) + 1):
        if window == "sqrtL":
            has = np.any((np.sqrt(lam) >= k) & (np.sqrt(lam) < k + 1))
            op = calc.spectral_window(model, k, k + 1)
            rhs = (1.0 + k) ** (n * (1.0 / p - 1.0 / pprime) - 1.0)
            target_q = pprime
        else:
            has = np.any((lam >= k) & (lam < k + 1))
            op = calc.spectral_window_l(model, k, k + 1)
            rhs = (1.0 + math.sqrt(k)) ** (n * (1.0 / p - 0.5) - 1.0)
            target_q = 2.0
        if not has:
            report.skipped += 1
            continue
        seed = _stable_seed("sogge", model.name, p, k)
        if p == 1.0:
            lhs, width = norm_1_to_q(op, target_q), 0.0
        else:
            br = bracket(op, p, target_q, seed=seed)
            lhs, width = br.lower, br.width
        report.records.append(
            ScanRecord(-1, 0.0, float(1 + k), f"E[{k},{k + 1})", lhs, rhs,
                       lhs / rhs, width, width > 0.25)
        )
    return report.finalize()


def rp_scan(model_or_cmodel, p, lam_grid, dlam: float | None = None) -> ConditionReport:
    """Spectral-measure scan: ||dE_{sqrtL}(lam)||_{p->p'} vs lam^{n(1/p-1/p')-1}.

    On discrete models dE is approximated by E[lam, lam+dlam)/dlam; on the
    continuum radial model the rank-one kernel is exact.
    """
    pprime = _dual_exponent(p)
    if isinstance(model_or_cmodel, ContinuumRadialModel):
        cm = model_or_cmodel
        n = cm.params.n
        report = ConditionReport(
            condition="R_p", model=cm.name, params=dict(p=p, s=pprime, q="", kappa=""),
            records=[],
        )
        for lam in lam_grid:
            ell = specfun_scattering(cm, lam)
            if pprime == math.inf:
                col_norm = float(np.max(np.abs(ell)))
            else:
                col_norm = float(((cm.x_w * np.abs(ell) ** pprime).sum()) ** (1.0 / pprime))
            lhs = cm.c_star * lam ** (n - 1.0) * col_norm**2
            rhs = lam ** (n * (1.0 / p - 1.0 / pprime) - 1.0)
            report.records.append(
                ScanRecord(-1, 0.0, float(lam), "dE", lhs, rhs, lhs / rhs)
            )
        return report.finalize()

    model = model_or_cmodel
    space = model.space
    n = space.doubling_dim
    if dlam is None:
        raise ValueError("discrete models need an explicit dlam")
    gaps = np.diff(np.sqrt(np.asarray(model.eigenvalues, dtype=float)))
    if gaps.size and dlam < 0.99 * float(np.max(gaps)):
        raise ValueError(
            f"dlam={dlam:g} below the spectral resolution (max gap {np.max(gaps):g})"
        )
    report = ConditionReport(
        condition="R_p", model=model.name, params=dict(p=p, s=pprime, q="", kappa=""),
        records=[],
    )
    for lam in lam_grid:
        op = calc.spectral_window(model, lam, lam + dlam)
        if not np.any(op.symbol):
            report.skipped += 1
            continue
        seed = _stable_seed("rp", model.name, p, lam)
        if p == 1.0:
            lhs, width = norm_1_to_q(op, pprime) / dlam, 0.0
        else:
            br = bracket(op, p, pprime, seed=seed)
            lhs, width = br.lower / dlam, br.width
        rhs = lam ** (n * (1.0 / p - 1.0 / pprime) - 1.0)
        report.records.append(
            ScanRecord(-1, 0.0, float(lam), f"dE[{lam:g})", lhs, rhs, lhs / rhs,
                       width, width > 0.25)
        )
    return report.finalize()


def specfun_scattering(cm: ContinuumRadialModel, lam: float) -> np.ndarray:
    from .specfun import scattering_l

    return scattering_l(cm.params, lam * cm.x_grid)


def ge_scan(model, p, N, ball_grid, t_grid):
    """Heat and resolvent localization scans (the Gaussian-route conditions).

    Returns (heat_report, resolvent_report); records with r < t are skipped.
    """
    space = model.space
    n = space.doubling_dim
    if p < 2.0 and N <= n * (1.0 / p - 0.5):
        raise ValueError(f"need N > n(1/p - 1/2) = {n * (1.0 / p - 0.5):g}")
    rep_g = ConditionReport(
        condition="G_{p,2}", model=model.name, params=dict(p=p, s=2, q="", kappa=""),
        records=[],
    )
    rep_e = ConditionReport(
        condition="E_{p,2}", model=model.name,
        params=dict(p=p, s=2, q="", kappa=str(N)), records=[],
    )
    for t in t_grid:
        op_g = calc.heat(model, t * t)
        op_e = calc.resolvent_power(model, t, N)
        for center, r in ball_grid:
            if r < t:
                rep_g.skipped += 1
                rep_e.skipped += 1
                continue
            mask = space.ball_mask(Ball(center, r))
            cols = np.flatnonzero(mask)
            if len(cols) == 0:
                continue
            v = float(space.weights[cols].sum())
            rhs = v ** (0.5 - 1.0 / p) * (r / t) ** (n * (1.0 / p - 0.5))
            for rep, op in ((rep_g, op_g), (rep_e, op_e)):
                seed = _stable_seed(rep.condition, model.name, p, t, center, r)
                lhs, width = _restricted_norm(op, cols, p, 2.0, seed)
                rep.records.append(
                    ScanRecord(center, float(r), float(1.0 / t), rep.condition,
                               lhs, rhs, lhs / rhs, width, width > 0.25)
                )
    rep_g.finalize()
    rep_e.finalize()
    joint = {
        "sup_g": rep_g.sup_ratio,
        "sup_e": rep_e.sup_ratio,
        "joint_bounded": bool(rep_g.sup_ratio < math.inf and rep_e.sup_ratio < math.inf),
    }
    rep_g.notes.update(joint)
    rep_e.notes.update(joint)
    return rep_g, rep_e


# ---------------------------------------------------------------------------
# Weak-type endpoint scan
# ---------------------------------------------------------------------------

@dataclass
class WeakTypeReport:
    delta: float
    p: float
    model: str
    per_f: dict  # f_id -> {R: sup over alpha of the quasinorm}
    uniformity_ratio: float
    overall_sup: float
    notes: dict = field(default_factory=dict)


def default_f_family(space, seed: int = 1234):
    """5 spikes, 3 multi-scale spike sums, 3 smooth bumps (fixed seeds)."""
    rng = np.random.default_rng(seed)
    n = space.npoints
    fam = []
    idx = rng.integers(0, n, size=5)
    for i, j in enumerate(idx):
        f = np.zeros(n)
        f[j] = 1.0 / space.weights[j]
        fam.append((f"spike{i}", f))
    for i in range(3):
        f = np.zeros(n)
        for scale_pow in range(3):
            js = rng.integers(0, n, size=2**scale_pow)
            f[js] += 1.0 / (space.weights[js] * 2.0**scale_pow)
        fam.append((f"multi{i}", f))
    for i in range(3):
        center = int(rng.integers(0, n))
        widthfrac = 0.02 * (i + 1)
        d = space.dist_from(center)
        sigma = widthfrac * space.total_mass ** (1.0 / space.doubling_dim)
        fam.append((f"bump{i}", np.exp(-(d**2) / (2.0 * sigma**2))))
    return fam


def weak_type_scan(
    model, p, q_for_delta, R_grid, f_family=None, alpha_grid=None, delta_shift: float = 0.0
) -> WeakTypeReport:
    """Weak-(p,p) quasinorm of the critical Bochner-Riesz mean, per R and f.

    quasinorm(f, R) = sup_alpha alpha mu{|S_R^delta f| > alpha}^{1/p} / ||f||_p.
    The alpha grid is placed relative to each output's sup and extended
    automatically when the sup sits at a grid end.
    """
    space = model.space
    n = space.doubling_dim
    delta = critical_exponent(p, q_for_delta, n) + delta_shift
    if f_family is None:
        f_family = default_f_family(space)
    per_f: dict = {}
    notes: dict = {}
    overall = 0.0
    for f_id, f in f_family:
        norm_f = space.lp_norm(f, p)
        per_f[f_id] = {}
        for R in R_grid:
            op = calc.bochner_riesz(model, R, delta)
            g = np.abs(op.apply(f))
            gmax = float(g.max())
            if alpha_grid is None:
                alphas = np.geomspace(max(gmax * 1e-4, 1e-300), gmax, 40)
            else:
                alphas = np.asarray(alpha_grid, dtype=float)
            while True:
                quasi = alphas * np.array(
                    [float(space.weights[g > a].sum()) for a in alphas]
                ) ** (1.0 / p) / norm_f
                top = int(np.argmax(quasi))
                if 0 < top or alphas[0] < 1e-12 * gmax:
                    break
                alphas = np.concatenate([[alphas[0] / 8.0], alphas])
                notes.setdefault("alpha_extended", []).append((f_id, float(R)))
            per_f[f_id][float(R)] = float(np.max(quasi))
            overall = max(overall, float(np.max(quasi)))
    ratios = []
    for f_id, m in per_f.items():
        vals = list(m.values())
        if min(vals) > 0:
            ratios.append(max(vals) / min(vals))
    return WeakTypeReport(
        delta=delta, p=p, model=model.name, per_f=per_f,
        uniformity_ratio=max(ratios) if ratios else math.inf,
        overall_sup=overall, notes=notes,
    )


# ---------------------------------------------------------------------------
# A-priori bound cross-check
# ---------------------------------------------------------------------------

def ab_check(model, p, s, q, kappa, N_grid, eps, F_family) -> ConditionReport:
    """Global p->p bound against N^{kappa n(1/p-1/s)+eps} ||delta_N F||_{N^kappa,q},
    cross-checked against the finite-measure Holder route."""
    space = model.space
    n = space.doubling_dim
    report = ConditionReport(
        condition="AB_p", model=model.name,
        params=dict(p=p, s=s, q=q, kappa=kappa), records=[],
    )
    holder_ok = True
    for N in N_grid:
        for f_id, profile in F_family:
            F = scale_mult(profile, 1.0 / N)
            op = calc.apply_multiplier_sqrt(model, F)
            seed = _stable_seed("ab", model.name, p, s, q, kappa, N, f_id)
            if p in (1.0, 2.0, math.inf):
                lhs, width = norm_p_to_p(op, p), 0.0
            else:
                br = bracket_p_to_p(op, p, seed=seed)
                lhs, width = br.lower, br.width
            rhs = N ** (kappa * n * (1.0 / p - 1.0 / s) + eps) * nq_norm(
                profile, int(round(N**kappa)), q
            )
            holder_rhs = N ** (n * (1.0 / p - 1.0 / s)) * nq_norm(profile, int(N), q)
            if lhs > 4.0 * max(holder_rhs, 1e-300) * space.total_mass ** abs(1.0 / p - 1.0 / s):
                holder_ok = False
            report.records.append(
                ScanRecord(-1, 0.0, float(N), f_id, lhs, rhs, lhs / rhs,
                           width, width > 0.25)
            )
    report.notes["holder_route_ok"] = holder_ok
    return report.finalize()
