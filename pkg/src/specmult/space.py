"""Finite metric measure spaces with doubling structure.

Every space is a quadrature grid: an atomic measure whose weights are the
midpoint-rule cell masses.  All L^p norms are then finite weighted sums and
the condition scans downstream are exactly computable.

Catalog geometries: interval [0, pi], circle of circumference 2*pi,
truncated weighted half-line (weight r^{n-1} dr), and the flat 2-torus.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np


class ResolutionError(ValueError):
    """Requested scale is below what the grid resolves."""


class AdmissibilityError(ValueError):
    """Decomposition height below the admissible threshold."""


HALFLINE_EPS_FRACTION = 2.0**-14  # left truncation of (0, inf) relative to R_max


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")


@dataclass
class MetricMeasureSpace:
    """Atomic (X, d, mu) with a declared doubling exponent.

    points: (N,) or (N, 2) coordinates in the model chart.
    weights: strictly positive cell masses.
    geometry_tag: interval | circle | halfline | torus2.
    doubling_dim: declared exponent n of V(x, lam r) <= C lam^n V(x, r).
    """

    points: np.ndarray
    weights: np.ndarray
    geometry_tag: str
    doubling_dim: float
    name: str = ""
    period: float = 2.0 * math.pi  # circle circumference / torus side

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights <= 0):
            raise ValueError("all quadrature weights must be strictly positive")
        if not np.isfinite(self.weights.sum()):
            raise ValueError("total mass must be finite")

    @property
    def npoints(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def spacing(self) -> float:
        """Typical grid spacing (max nearest-neighbour distance estimate)."""
        if self.geometry_tag in ("torus2", "plane2"):
            span = self.period if self.geometry_tag == "torus2" else (
                self.points.max() - self.points.min()
            )
            return span / math.sqrt(self.npoints)
        pts = np.sort(self.points)
        gaps = np.diff(pts)
        if self.geometry_tag == "circle":
            return float(max(gaps.max(), self.period - (pts[-1] - pts[0])))
        return float(gaps.max())

    def dist_from(self, i: int) -> np.ndarray:
        """Distances d(x_i, .) to every point."""
        if self.geometry_tag in ("interval", "halfline"):
            return np.abs(self.points - self.points[i])
        if self.geometry_tag == "circle":
            d = np.abs(self.points - self.points[i])
            return np.minimum(d, self.period - d)
        if self.geometry_tag == "torus2":
            d = np.abs(self.points - self.points[i])
            d = np.minimum(d, self.period - d)
            return np.sqrt((d**2).sum(axis=1))
        if self.geometry_tag == "plane2":
            d = self.points - self.points[i]
            return np.sqrt((d**2).sum(axis=1))
        raise ValueError(f"unknown geometry {self.geometry_tag!r}")

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_from(i)[j])

    def ball_mask(self, ball: Ball) -> np.ndarray:
        """Open-ball membership d(x, center) < radius."""
        return self.dist_from(ball.center) < ball.radius

    def lp_norm(self, f: np.ndarray, p: float) -> float:
        f = np.asarray(f)
        if p == math.inf:
            return float(np.max(np.abs(f)))
        return float((self.weights * np.abs(f) ** p).sum() ** (1.0 / p))

    def serialize(self) -> str:
        buf = io.StringIO()
        buf.write("# specmult space v1\n")
        buf.write(f"geometry {self.geometry_tag}\n")
        buf.write(f"doubling_dim {self.doubling_dim!r}\n")
        buf.write(f"period {self.period!r}\n")
        buf.write(f"name {self.name}\n")
        buf.write(f"npoints {self.npoints}\n")
        cols = self.points.reshape(self.npoints, -1)
        for row, w in zip(cols, self.weights):
            buf.write(" ".join(f"{v!r}" for v in row) + f" {w!r}\n")
        return buf.getvalue()


def deserialize_space(text: str) -> MetricMeasureSpace:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = {}
    idx = 0
    while idx < len(lines):
        key, _, val = lines[idx].partition(" ")
        idx += 1
        header[key] = val
        if key == "npoints":
            break
    n = int(header["npoints"])
    rows = [list(map(float, ln.split())) for ln in lines[idx : idx + n]]
    arr = np.array(rows)
    pts = arr[:, :-1]
    if pts.shape[1] == 1:
        pts = pts[:, 0]
    return MetricMeasureSpace(
        points=pts,
        weights=arr[:, -1],
        geometry_tag=header["geometry"],
        doubling_dim=float(header["doubling_dim"]),
        name=header.get("name", ""),
        period=float(header.get("period", 2.0 * math.pi)),
    )


# ---------------------------------------------------------------------------
# Catalog constructors
# ---------------------------------------------------------------------------

def interval_space(npoints: int, length: float = math.pi) -> MetricMeasureSpace:
    h = length / npoints
    pts = (np.arange(npoints) + 0.5) * h
    w = np.full(npoints, h)
    return MetricMeasureSpace(pts, w, "interval", 1.0, name=f"interval:{npoints}")


def circle_space(npoints: int) -> MetricMeasureSpace:
    period = 2.0 * math.pi
    h = period / npoints
    pts = np.arange(npoints) * h
    w = np.full(npoints, h)
    return MetricMeasureSpace(pts, w, "circle", 1.0, name=f"circle:{npoints}", period=period)


def halfline_space(npoints: int, n: float, r_max: float = 1.0) -> MetricMeasureSpace:
    """Truncated weighted half-line [eps, R_max] with measure r^{n-1} dr.

    The truncation eps = R_max / 2^14 is reported through the space name;
    the quadratic-form singularity at 0 is cut off, not hidden.
    """
    eps = r_max * HALFLINE_EPS_FRACTION
    h = (r_max - eps) / npoints
    pts = eps + (np.arange(npoints) + 0.5) * h
    w = pts ** (n - 1.0) * h
    return MetricMeasureSpace(
        pts, w, "halfline", float(n), name=f"halfline:n={n:g}:{npoints}"
    )


def torus2_space(npoints_per_axis: int) -> MetricMeasureSpace:
    period = 2.0 * math.pi
    h = period / npoints_per_axis
    axis = np.arange(npoints_per_axis) * h
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    w = np.full(len(pts), h * h)
    return MetricMeasureSpace(
        pts, w, "torus2", 2.0, name=f"torus2:{npoints_per_axis}", period=period
    )


def space_from_name(name: str) -> MetricMeasureSpace:
    """Parse catalog strings like "circle:1024" or "halfline:n=3:4096"."""
    parts = name.split(":")
    kind = parts[0]
    try:
        if kind == "circle":
            return circle_space(int(parts[1]))
        if kind == "interval":
            return interval_space(int(parts[1]))
        if kind == "torus2":
            return torus2_space(int(parts[1]))
        if kind == "halfline":
            kw = dict(p.split("=") for p in parts[1:] if "=" in p)
            npts = int([p for p in parts[1:] if "=" not in p][0])
            return halfline_space(npts, n=float(kw["n"]), r_max=float(kw.get("rmax", 1.0)))
    except (IndexError, KeyError, ValueError) as exc:
        raise ValueError(f"bad space spec {name!r}: {exc}") from exc
    raise ValueError(f"unknown space kind {kind!r} in {name!r}")


# ---------------------------------------------------------------------------
# Volume and doubling
# ---------------------------------------------------------------------------

def volume(space: MetricMeasureSpace, ball: Ball) -> float:
    """mu(B(x, r)) with the open-ball convention d < r."""
    if not 0 <= ball.center < space.npoints:
        raise ValueError("ball center is not a valid point index")
    return float(space.weights[space.ball_mask(ball)].sum())


@dataclass(frozen=True)
class DoublingReport:
    c_est: float
    n_est: float
    n_declared: float
    samples: int


def doubling_report(
    space: MetricMeasureSpace,
    radius_grid,
    lambda_grid,
    centers=None,
) -> DoublingReport:
    """Least C with V(x, lam r) <= C lam^n V(x, r) over the sample grid,
    plus the pooled log-log regression exponent n_est."""
    radius_grid = np.asarray(radius_grid, dtype=float)
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if radius_grid.size == 0 or lambda_grid.size == 0:
        raise ValueError("radius and lambda grids must be nonempty")
    if np.any(lambda_grid < 1.0):
        raise ValueError("doubling scan requires lambda >= 1")
    if centers is None:
        step = max(1, space.npoints // 32)
        centers = range(0, space.npoints, step)

    c_est = 0.0
    logs_lam, logs_ratio = [], []
    count = 0
    for i in centers:
        dists = space.dist_from(i)
        for r in radius_grid:
            v0 = float(space.weights[dists < r].sum())
            if v0 <= 0.0:
                raise ResolutionError(
                    f"V(x_{i}, {r}) = 0: radius below the grid resolution"
                )
            for lam in lambda_grid:
                v1 = float(space.weights[dists < lam * r].sum())
                c_est = max(c_est, v1 / (lam**space.doubling_dim * v0))
                if lam > 1.0:
                    logs_lam.append(math.log(lam))
                    logs_ratio.append(math.log(v1 / v0))
                count += 1
    slope = np.polyfit(logs_lam, logs_ratio, 1)[0] if len(logs_lam) > 1 else float("nan")
    return DoublingReport(
        c_est=float(c_est),
        n_est=float(slope),
        n_declared=space.doubling_dim,
        samples=count,
    )


# ---------------------------------------------------------------------------
# Separated nets
# ---------------------------------------------------------------------------

@dataclass
class Net:
    """Greedy maximal rho/10-separated set with its disjoint cell partition."""

    centers: list
    rho: float
    cells: np.ndarray  # cells[i] = index into centers owning point i
    overlap_k: int

    @property
    def ncenters(self) -> int:
        return len(self.centers)


def build_net(space: MetricMeasureSpace, rho: float) -> Net:
    if rho < 2.0 * space.spacing():
        raise ResolutionError(
            f"net scale rho={rho:g} below twice the grid spacing {space.spacing():g}"
        )
    sep = rho / 10.0
    n = space.npoints
    centers: list[int] = []
    owner = np.full(n, -1, dtype=int)
    # greedy in ascending point order: deterministic and reproducible
    for i in range(n):
        if owner[i] >= 0:
            continue
        d = space.dist_from(i)
        owner[(owner < 0) & (d <= sep)] = len(centers)
        centers.append(i)
    # paper's set-difference cells: first center within rho/10 owns the point;
    # the greedy sweep above assigns exactly that.
    k = 0
    for ci, i in enumerate(centers):
        d = space.dist_from(i)
        k = max(k, int(sum(1 for j in centers if d[j] <= 2.0 * rho)))
    return Net(centers=centers, rho=rho, cells=owner, overlap_k=k)


# ---------------------------------------------------------------------------
# Patchwork estimate (net decomposition of an off-diagonally supported map)
# ---------------------------------------------------------------------------

def patchwork_ratio(
    T,
    space: MetricMeasureSpace,
    rho: float,
    p: float,
    s: float,
    support_tol: float = 1e-8,
    centers=None,
) -> float:
    """Measured ||T||_{p->p} over sup_x V(x,rho)^{1/p-1/s} ||T P_{B(x,rho)}||_{p->s}.

    T must have its kernel supported within distance rho of the diagonal
    (checked in relative kernel mass, tolerance `support_tol`).  A finite
    ratio confirms the net-decomposition inequality with that constant.
    """
    from . import estimate as est  # local import to avoid a cycle

    mass_out, mass_tot = _offdiagonal_mass(T, space, rho)
    if mass_tot > 0 and mass_out / mass_tot > support_tol:
        raise ValueError(
            f"kernel support violates D_rho: relative off-diagonal mass "
            f"{mass_out / mass_tot:.3e} beyond tolerance {support_tol:g}"
        )
    lhs = est.norm_p_to_p(T, p)
    if centers is None:
        centers = range(space.npoints)
    best = 0.0
    for i in centers:
        mask = space.dist_from(i) < rho
        v = float(space.weights[mask].sum())
        if v <= 0:
            continue
        nrm = est.norm_p_to_s_restricted(T, mask, p, s)
        best = max(best, v ** (1.0 / p - 1.0 / s) * nrm)
    if best == 0.0:
        return math.inf if lhs > 0 else 0.0
    return lhs / best


def _offdiagonal_mass(T, space: MetricMeasureSpace, rho: float):
    """(mass outside D_rho, total mass) of |K_T| against mu x mu."""
    w = space.weights
    out = 0.0
    tot = 0.0
    for j in range(space.npoints):
        col = np.abs(T.kernel_column(j)) * w * w[j]
        d = space.dist_from(j)
        tot += col.sum()
        out += col[d > rho].sum()
    return out, tot


# ---------------------------------------------------------------------------
# Calderon-Zygmund decomposition (1D dyadic)
# ---------------------------------------------------------------------------

@dataclass
class CZDecomposition:
    good: np.ndarray
    bad_parts: list  # (b_j array, Ball, dyadic level j)
    height: float
    exponent: float
    space: MetricMeasureSpace

    def reconstruction_error(self, f: np.ndarray) -> float:
        total = self.good.copy()
        for b, _, _ in self.bad_parts:
            total = total + b
        return float(np.max(np.abs(total - f)))

    def overlap_count(self, dilation: float = 4.0) -> int:
        if not self.bad_parts:
            return 0
        hits = np.zeros(self.space.npoints, dtype=int)
        for _, ball, _ in self.bad_parts:
            hits += self.space.dist_from(ball.center) < dilation * ball.radius
        return int(hits.max())


def cz_decompose(
    space: MetricMeasureSpace, f: np.ndarray, alpha: float, p: float
) -> CZDecomposition:
    """Dyadic stopping-time decomposition of f at height alpha applied to |f|^p.

    Bad intervals are maximal dyadic intervals with mu-average of |f|^p above
    alpha^p; each is inflated to a ball whose radius is the next power of two
    times the cell width, so the parts can be binned by dyadic scale.
    """
    if space.geometry_tag not in ("interval", "circle"):
        raise ValueError("cz_decompose supports interval and circle geometries only")
    if not 1.0 <= p < 2.0:
        raise ValueError("cz exponent p must lie in [1, 2)")
    f = np.asarray(f, dtype=float)
    n = space.npoints
    if n & (n - 1):
        raise ValueError("cz_decompose needs a power-of-two grid")
    norm_f = space.lp_norm(f, p)
    threshold = space.total_mass ** (-1.0 / p) * norm_f
    if alpha <= threshold:
        raise AdmissibilityError(
            f"height alpha={alpha:g} must exceed mu(X)^(-1/p)||f||_p = {threshold:g}"
        )

    w = space.weights
    dens = np.abs(f) ** p * w
    selected: list[tuple[int, int]] = []  # (start, length) in index space

    def descend_children(start: int, length: int):
        mass = dens[start : start + length].sum()
        mu = w[start : start + length].sum()
        if mass > alpha**p * mu:
            selected.append((start, length))
        elif length > 1:
            half = length // 2
            descend_children(start, half)
            descend_children(start + half, half)

    # top level: admissibility guarantees the global average is below alpha^p
    descend_children(0, n)

    good = f.copy()
    bad_parts = []
    cell = space.spacing()
    for start, length in selected:
        idx = slice(start, start + length)
        avg = float((f[idx] * w[idx]).sum() / w[idx].sum())
        b = np.zeros_like(f)
        b[idx] = f[idx] - avg
        good[idx] = avg
        center = start + (length - 1) // 2
        half_extent = (length / 2.0 + 1.0) * cell
        level = math.ceil(math.log2(half_extent / cell))
        radius = (2.0**level) * cell
        bad_parts.append((b, Ball(center=center, radius=radius), level))
    return CZDecomposition(
        good=good, bad_parts=bad_parts, height=alpha, exponent=p, space=space
    )


@dataclass(frozen=True)
class CZCheck:
    reconstruction_error: float
    good_p_ratio: float        # ||g||_p / ||f||_p
    good_sup_ratio: float      # ||g||_inf / alpha
    overlap_k: int
    bad_mean_ratio: float      # max_j  int |b_j|^p dmu / (alpha^p mu(B_j))
    ball_mass_constant: float  # sum mu(B_j) * alpha^p / ||f||_p^p

    def ok(self, c_max: float = 16.0, k_max: int = 8) -> bool:
        return (
            self.reconstruction_error < 1e-12
            and self.good_p_ratio <= c_max
            and self.good_sup_ratio <= c_max
            and self.overlap_k <= k_max
            and self.bad_mean_ratio <= c_max
            and self.ball_mass_constant <= c_max
        )


def cz_check(space: MetricMeasureSpace, f: np.ndarray, dec: CZDecomposition) -> CZCheck:
    """Measure the four decomposition properties and return their constants."""
    p, alpha = dec.exponent, dec.height
    norm_f = space.lp_norm(f, p)
    rec = dec.reconstruction_error(f)
    g_p = space.lp_norm(dec.good, p) / norm_f if norm_f > 0 else 0.0
    g_sup = float(np.max(np.abs(dec.good))) / alpha
    k = dec.overlap_count()
    mean_ratio = 0.0
    ball_mass = 0.0
    for b, ball, _ in dec.bad_parts:
        mu_ball = volume(space, ball)
        supp = b != 0
        if np.any(supp & ~space.ball_mask(ball)):
            raise AssertionError("bad part escapes its ball")
        mean_ratio = max(
            mean_ratio,
            float((space.weights * np.abs(b) ** p).sum()) / (alpha**p * mu_ball),
        )
        ball_mass += mu_ball
    const = ball_mass * alpha**p / norm_f**p if norm_f > 0 else 0.0
    return CZCheck(
        reconstruction_error=rec,
        good_p_ratio=g_p,
        good_sup_ratio=g_sup,
        overlap_k=k,
        bad_mean_ratio=mean_ratio,
        ball_mass_constant=const,
    )
