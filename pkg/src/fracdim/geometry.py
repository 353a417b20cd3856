"""Sample generators and metric primitives.

Every generator returns a :class:`SampleSet`: a finite point cloud that is
delta-dense in the underlying set (each point of the true set lies within
``delta`` of some sample point).  Sampling is deterministic lattice-on-
parametrization, so the density bound is a guarantee rather than an
expectation, and outputs are canonicalized by lexicographic sort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DimensionMismatchError,
    ResourceLimitError,
    UnderResolutionError,
)

# Hard cap on generated points; generators refuse rather than swap-thrash.
MAX_POINTS = 80_000_000

# A sphere is retained in a truncated collection while its gap to the next
# sphere is at least GAP_FACTOR * delta; below that the tail is visually a
# solid ball at every admissible covering scale.
GAP_FACTOR = 4.0


@dataclass(frozen=True)
class SampleSet:
    """Finite delta-dense sample of a bounded subset of R^d."""

    points: np.ndarray
    delta: float
    ambient_dim: int
    family: str | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            pts = pts.reshape(len(pts), -1)
        object.__setattr__(self, "points", pts)
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.ambient_dim < 1:
            raise ValueError("ambient_dim must be >= 1")
        if pts.shape[0] == 0:
            raise ValueError("points must be non-empty")
        if pts.shape[1] != self.ambient_dim:
            raise ValueError(
                f"points have {pts.shape[1]} coordinates, expected {self.ambient_dim}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("all coordinates must be finite")

    def __len__(self):
        return self.points.shape[0]

    @property
    def diameter(self) -> float:
        """Diagonal of the bounding box (upper bound on the true diameter)."""
        ext = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.sqrt((ext**2).sum()))

    def to_csv(self, path) -> None:
        """Write the CSV interchange format (header comment + one row per point)."""
        fam = self.family if self.family is not None else "unknown"
        header = f"dim={self.ambient_dim} delta={self.delta:.17g} family={fam}"
        np.savetxt(path, self.points, fmt="%.17g", delimiter=",",
                   header=header, comments="# ")

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        with open(path) as fh:
            first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing '# dim=... delta=... family=...' header")
        meta = {}
        for tok in first.lstrip("#").split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                meta[k] = v
        try:
            dim = int(meta["dim"])
            delta = float(meta["delta"])
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: malformed header: {first.strip()}") from exc
        pts = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        return cls(points=pts, delta=delta, ambient_dim=dim,
                   family=meta.get("family"))


def _canonicalize(points: np.ndarray) -> np.ndarray:
    """Sort rows lexicographically so output order is deterministic."""
    order = np.lexsort(points.T[::-1])
    return np.ascontiguousarray(points[order])


def _check_budget(n_estimate: float, what: str) -> None:
    if n_estimate > MAX_POINTS:
        raise ResourceLimitError(
            f"{what} would need ~{n_estimate:.2g} sample points "
            f"(budget {MAX_POINTS:.2g}); increase delta or truncate harder"
        )


# ---------------------------------------------------------------------------
# primitive samplers


def _sphere_lattice(radius: float, h: float, dim: int) -> np.ndarray:
    """Angular lattice with arc spacing <= h in every angular direction."""
    if dim == 1:
        return np.array([[-radius], [radius]])
    if dim == 2:
        n = max(8, int(math.ceil(2.0 * math.pi * radius / h)))
        ang = 2.0 * math.pi * np.arange(n) / n
        return radius * np.column_stack([np.cos(ang), np.sin(ang)])
    # dim >= 3: latitude theta in [0, pi]; each ring is a (dim-1)-sphere of
    # radius r*sin(theta) sampled with the same arc spacing h, so every
    # angular direction contributes at most h/2 to the covering radius
    n_lat = max(3, int(math.ceil(math.pi * radius / h)) + 1)
    thetas = np.linspace(0.0, math.pi, n_lat)
    rows = []
    for th in thetas:
        ring_r = radius * math.sin(th)
        x0 = radius * math.cos(th)
        if ring_r < 1e-15 * radius:
            rows.append(np.array([[x0] + [0.0] * (dim - 1)]))
            continue
        sub = _sphere_lattice(ring_r, h, dim - 1)
        rows.append(np.column_stack([np.full(len(sub), x0), sub]))
    return np.vstack(rows)


def sphere_surface_points(radius: float, delta: float, dim: int) -> np.ndarray:
    """Delta-dense lattice sample of the round sphere S(0, radius) in R^dim.

    Latitude rings with a single arc spacing h = 2*delta/sqrt(dim-1) shared
    by all recursion levels; each of the dim-1 angular directions is then
    off by at most h/2, so the covering radius is at most delta.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim == 1:
        return np.array([[-radius], [radius]])
    return _sphere_lattice(radius, 2.0 * delta / math.sqrt(dim - 1), dim)


def ball_points(radius: float, delta: float, dim: int) -> np.ndarray:
    """Delta-dense grid sample of the closed ball B(0, radius) in R^dim.

    Grid points just outside the ball are projected onto the boundary
    sphere instead of dropped (projection onto a convex set is
    1-Lipschitz, so the covering radius bound survives near the boundary).
    """
    h = 2.0 * delta / math.sqrt(dim)
    k = int(math.ceil(radius / h)) + 1
    _check_budget((2 * k + 1) ** dim, "ball sampling")
    axes = [np.arange(-k, k + 1) * h] * dim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    norms = np.sqrt((grid**2).sum(axis=1))
    keep = norms <= radius + h * math.sqrt(dim)
    grid, norms = grid[keep], norms[keep]
    outside = norms > radius
    grid[outside] *= (radius / norms[outside])[:, None]
    if len(grid) == 0:
        grid = np.zeros((1, dim))
    return grid


# ---------------------------------------------------------------------------
# collection specs


@dataclass(frozen=True)
class CollectionSpec:
    """Parameters of a truncated concentric collection."""

    family: str = "concentric-spheres"
    rate: str = "polynomial"  # or "exponential"
    p: float = 1.0            # polynomial degree, radii n^-p
    lam: float = 1.0          # exponential rate, radii e^(-lam n)
    ambient_dim: int = 2
    c1: float = 1.0
    c2: float = 1.0
    n_max: int = 10**9
    delta: float = 1e-3
    include_core_ball: bool = True
    snowflake_scale: float = 1.0  # only used by snowflake-collection

    def __post_init__(self):
        if self.family not in (
            "concentric-spheres", "spiral", "shell", "snowflake-collection"
        ):
            raise ValueError(f"unknown family {self.family!r}")
        if self.rate not in ("polynomial", "exponential"):
            raise ValueError(f"unknown rate {self.rate!r}")
        if self.rate == "polynomial" and self.p <= 0:
            raise ValueError("p must be > 0")
        if self.rate == "exponential" and self.lam <= 0:
            raise ValueError("lambda must be > 0")
        if not (0 < self.c1 <= 1) or not (0 < self.c2 <= 1):
            raise ValueError("c1, c2 must lie in (0, 1]")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if self.family == "spiral" and self.ambient_dim != 2:
            raise ValueError("spiral lives in R^2")
        if self.family == "shell" and self.ambient_dim != 3:
            raise ValueError("shell lives in R^3")

    def radius_sequence(self, n: np.ndarray | int) -> np.ndarray:
        """a_n: n^-p for polynomial rate, e^(-lam n) for exponential."""
        n = np.asarray(n, dtype=float)
        if self.rate == "polynomial":
            return n ** (-self.p)
        return np.exp(-self.lam * n)


@dataclass(frozen=True)
class ShellSpec:
    """Truncated polynomial spiral shell in R^3."""

    p: float
    u_max: float | None = None  # default: delta^(-1/p), tail inside one delta-ball
    v_max: float | None = None  # default: 1 + 2*pi, one full revolution in v
    delta: float = 1e-3

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("p must be > 0")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if self.u_max is not None and self.u_max <= 1:
            raise ValueError("u_max must be > 1")
        if self.v_max is not None and self.v_max <= 1:
            raise ValueError("v_max must be > 1")

    @property
    def effective_u_max(self) -> float:
        if self.u_max is not None:
            return self.u_max
        return self.delta ** (-1.0 / self.p)

    @property
    def effective_v_max(self) -> float:
        # the v-parametrization is 2*pi periodic for fixed u, so one
        # revolution already realizes the full image
        if self.v_max is not None:
            return self.v_max
        return 1.0 + 2.0 * math.pi


def truncation_index(spec: CollectionSpec) -> int:
    """Largest sphere index retained under the gap rule and n_max."""
    delta = spec.delta
    n = 1
    n_hi = spec.n_max
    if spec.rate == "polynomial":
        # gap(n) = c1 (n^-p - (n+1)^-p) decreasing; bisect for last n with
        # gap >= GAP_FACTOR * delta
        def gap(k):
            return spec.c1 * (k ** (-spec.p) - (k + 1) ** (-spec.p))
    else:
        def gap(k):
            return spec.c1 * (math.exp(-spec.lam * k) - math.exp(-spec.lam * (k + 1)))
    if gap(1) < GAP_FACTOR * delta:
        raise UnderResolutionError(
            f"delta={delta:g} cannot resolve even the first inter-sphere gap "
            f"{gap(1):g}; need delta <= {gap(1) / GAP_FACTOR:g}",
            required_delta=gap(1) / GAP_FACTOR,
        )
    lo, hi = 1, 2
    while hi < n_hi and gap(hi) >= GAP_FACTOR * delta:
        lo, hi = hi, min(2 * hi, n_hi)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if gap(mid) >= GAP_FACTOR * delta:
            lo = mid
        else:
            hi = mid - 1
    n = min(lo, spec.n_max)
    if n >= 2 and gap(n - 1) <= delta:
        raise UnderResolutionError(
            f"delta={delta:g} is not below the smallest retained gap "
            f"{gap(n - 1):g}",
            required_delta=gap(n - 1) / GAP_FACTOR,
        )
    return n


def generate_concentric_spheres(spec: CollectionSpec) -> SampleSet:
    """Truncated round concentric sphere collection, radii c1 * a_n.

    Spheres are kept while consecutive gaps stay resolvable at the target
    delta; if ``include_core_ball`` is set, the discarded tail is replaced
    by a solid delta-dense ball of the innermost retained radius.
    """
    if spec.family != "concentric-spheres":
        raise ValueError("spec.family must be 'concentric-spheres'")
    d = spec.ambient_dim
    n_keep = truncation_index(spec)
    radii = spec.c1 * spec.radius_sequence(np.arange(1, n_keep + 1))
    est = sum(
        (2 * math.pi * r / spec.delta) ** (d - 1) / max(1, (d - 1)) for r in radii
    )
    _check_budget(est, "concentric sphere sampling")
    parts = [sphere_surface_points(r, spec.delta, d) for r in radii]
    if spec.include_core_ball:
        parts.append(ball_points(radii[-1], spec.delta, d))
    pts = _canonicalize(np.vstack(parts))
    fam = "concentric" if spec.rate == "polynomial" else "concentric-exp"
    return SampleSet(points=pts, delta=spec.delta, ambient_dim=d, family=fam)


def collection_radii(spec: CollectionSpec) -> np.ndarray:
    """Radii c1 * a_n of the retained spheres (same truncation as generation)."""
    n_keep = truncation_index(spec)
    return spec.c1 * spec.radius_sequence(np.arange(1, n_keep + 1))


def generate_spiral(p: float, t_max: float | None = None,
                    delta: float = 1e-3) -> SampleSet:
    """Delta-dense sample of the planar spiral {t^-p e^{it} : 1 <= t <= t_max}.

    Steps in t follow the local Lipschitz bound |dz/dt| <= sqrt(1+p^2) t^-p,
    so consecutive samples are within delta of each other along the arc.
    """
    if p <= 0:
        raise ValueError("p must be > 0")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    tail_cutoff = delta ** (-1.0 / p)
    if t_max is None:
        t_max = tail_cutoff
    if t_max <= 1:
        raise ValueError("t_max must be > 1")
    lip = math.sqrt(1.0 + p * p)
    if p < 1:
        est = lip * (t_max ** (1 - p)) / ((1 - p) * delta)
    else:
        est = lip * math.log(t_max) / delta + 1
    _check_budget(est, "spiral sampling")
    ts = [1.0]
    t = 1.0
    while t < t_max:
        t = min(t_max, t + delta * (t ** p) / lip)
        ts.append(t)
    ts = np.asarray(ts)
    rad = ts ** (-p)
    pts = np.column_stack([rad * np.cos(ts), rad * np.sin(ts)])
    if t_max >= tail_cutoff:
        # remaining tail lies inside one delta-ball at the origin
        pts = np.vstack([pts, [[0.0, 0.0]]])
    return SampleSet(points=_canonicalize(pts), delta=delta, ambient_dim=2,
                     family="spiral")


def generate_shell(spec: ShellSpec) -> SampleSet:
    """Delta-dense sample of the truncated polynomial spiral shell in R^3.

    Parametrization (u^-p cos u sin v, u^-p sin u sin v, u^-p cos v) over
    [1, u_max] x [1, v_max]; parameter steps come from the Lipschitz bounds
    |dX/du| <= (1+p) u^-p and |dX/dv| = u^-p.
    """
    p, delta = spec.p, spec.delta
    u_max = spec.effective_u_max
    v_max = spec.effective_v_max
    v_span = v_max - 1.0
    if p < 0.5:
        est = (1 + p) * v_span * u_max ** (1 - 2 * p) / ((1 - 2 * p) * delta**2)
    else:
        est = (1 + p) * v_span * (1 + math.log(u_max)) / delta**2
    _check_budget(est, "shell sampling")
    rows = []
    u = 1.0
    while True:
        r = u ** (-p)
        nv = max(2, int(math.ceil(v_span * r / delta)) + 1)
        v = np.linspace(1.0, v_max, nv)
        sv, cv = np.sin(v), np.cos(v)
        cu, su = math.cos(u), math.sin(u)
        rows.append(np.column_stack([r * cu * sv, r * su * sv, r * cv]))
        if u >= u_max:
            break
        u = min(u_max, u + delta * (u ** p) / (1.0 + p))
    pts = np.vstack(rows)
    if u_max >= delta ** (-1.0 / p):
        pts = np.vstack([pts, [[0.0, 0.0, 0.0]]])
    return SampleSet(points=_canonicalize(pts), delta=delta, ambient_dim=3,
                     family="shell")


# ---------------------------------------------------------------------------
# Koch snowflake


def koch_snowflake_vertices(level: int, scale: float = 1.0) -> np.ndarray:
    """Ordered vertices of the Koch snowflake boundary at a construction level.

    The initial equilateral triangle is centered at the origin with
    circumradius ``scale``; all later bumps stay inside that circle.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    _check_budget(3 * 4**level + 1, "snowflake recursion")
    z = scale * np.exp(2j * math.pi * (np.arange(3) + 0.25) / 3)
    z = np.append(z, z[0])
    for _ in range(level):
        a, b = z[:-1], z[1:]
        s1 = a + (b - a) / 3.0
        s2 = a + 2.0 * (b - a) / 3.0
        # bump points outward (right of travel on the CCW boundary)
        tip = s1 + (s2 - s1) * np.exp(-1j * math.pi / 3.0)
        new = np.empty(4 * len(a) + 1, dtype=complex)
        new[0:-1:4] = a
        new[1::4] = s1
        new[2::4] = tip
        new[3::4] = s2
        new[-1] = z[-1]
        z = new
    return np.column_stack([z.real, z.imag])


def generate_snowflake(level: int, scale: float = 1.0) -> SampleSet:
    """Boundary-only sample of the level-L Koch snowflake, delta = scale*3^-L.

    Each level-L segment is subdivided so the along-curve spacing is below
    half the declared delta, which together with the Hausdorff distance of
    the level-L polyline to the true snowflake keeps the sample delta-dense
    in the limit set.
    """
    verts = koch_snowflake_vertices(level, scale)
    delta = scale * 3.0 ** (-level)
    a, b = verts[:-1], verts[1:]
    # 4 subdivisions per segment: spacing = sqrt(3)*delta/4 ~ 0.43*delta
    fracs = np.arange(4) / 4.0
    pts = (a[:, None, :] * (1 - fracs)[None, :, None]
           + b[:, None, :] * fracs[None, :, None]).reshape(-1, 2)
    return SampleSet(points=_canonicalize(pts), delta=delta, ambient_dim=2,
                     family="snowflake")


def snowflake_interior_points(level: int, scale: float, delta: float) -> np.ndarray:
    """Delta-dense raster of the closed region bounded by the snowflake."""
    from matplotlib.path import Path

    verts = koch_snowflake_vertices(level, scale)
    h = 2.0 * delta / math.sqrt(2.0)
    k = int(math.ceil(scale / h))
    _check_budget((2 * k + 1) ** 2, "snowflake rasterization")
    ax = np.arange(-k, k + 1) * h
    gx, gy = np.meshgrid(ax, ax, indexing="ij")
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    mask = Path(verts).contains_points(grid)
    inner = grid[mask]
    boundary = generate_snowflake(level, scale).points
    return np.vstack([inner, boundary]) if len(inner) else boundary


def generate_snowflake_collection(spec: CollectionSpec) -> SampleSet:
    """Concentric collection whose generator is the Koch snowflake boundary.

    Copy n is scaled so its outer radius (= max distance from the center)
    equals c1 * a_n; the construction level per copy is chosen so the
    per-copy sampling density meets the collection delta.
    """
    if spec.family != "snowflake-collection":
        raise ValueError("spec.family must be 'snowflake-collection'")
    n_keep = truncation_index(spec)
    radii = spec.c1 * spec.radius_sequence(np.arange(1, n_keep + 1))
    parts = []
    for r in radii:
        level = max(0, int(math.ceil(math.log(r / spec.delta) / math.log(3.0))))
        parts.append(generate_snowflake(level, r).points)
    if spec.include_core_ball:
        r = radii[-1]
        level = max(0, int(math.ceil(math.log(r / spec.delta) / math.log(3.0))))
        parts.append(snowflake_interior_points(level, r, spec.delta))
    pts = _canonicalize(np.vstack(parts))
    return SampleSet(points=pts, delta=spec.delta, ambient_dim=2,
                     family="snowflake-collection")


def generate(spec: CollectionSpec) -> SampleSet:
    """Dispatch on spec.family."""
    if spec.family == "concentric-spheres":
        return generate_concentric_spheres(spec)
    if spec.family == "snowflake-collection":
        return generate_snowflake_collection(spec)
    if spec.family == "spiral":
        return generate_spiral(spec.p, delta=spec.delta)
    if spec.family == "shell":
        return generate_shell(ShellSpec(p=spec.p, delta=spec.delta))
    raise ValueError(f"unknown family {spec.family!r}")


# ---------------------------------------------------------------------------
# metric primitives


def _check_dims(A: SampleSet, B: SampleSet) -> None:
    if A.ambient_dim != B.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}"
        )


def hausdorff_distance(A: SampleSet, B: SampleSet) -> float:
    """Hausdorff distance between the two samples (max of directed sups).

    Accurate to A.delta + B.delta relative to the underlying sets.
    """
    _check_dims(A, B)
    ta, tb = cKDTree(A.points), cKDTree(B.points)
    d_ab = tb.query(A.points, k=1)[0].max()
    d_ba = ta.query(B.points, k=1)[0].max()
    return float(max(d_ab, d_ba))


def set_distance(A: SampleSet, B: SampleSet) -> float:
    """Minimum pairwise distance between the two samples."""
    _check_dims(A, B)
    tb = cKDTree(B.points)
    return float(tb.query(A.points, k=1)[0].min())


def radial_stretch(x: np.ndarray, p: float, q: float) -> np.ndarray:
    """The (p/q)-quasiconformal map |x|^(q/p - 1) x, fixing 0 and the unit sphere."""
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be > 0")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    norms = np.sqrt((pts**2).sum(axis=1))
    out = np.zeros_like(pts)
    nz = norms > 0
    out[nz] = pts[nz] * (norms[nz] ** (q / p - 1.0))[:, None]
    return out[0] if single else out


@dataclass
class ConcentricReport:
    """Per-index check of the defining conditions of a concentric collection."""

    hausdorff_ratios: list[float]   # d_H(S_n, {0}) / a_n, one per sphere
    gap_ratios: list[float]         # dist(S_n, S_{n+1}) / (a_n - a_{n+1})
    c1: float
    c2: float
    tol: float
    failed_hausdorff: list[int] = field(default_factory=list)
    failed_gaps: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            not self.failed_hausdorff
            and not self.failed_gaps
            and 0 < self.c1 <= 1 + self.tol
            and 0 < self.c2 <= 1 + self.tol
        )


def verify_concentric_conditions(collection: list[SampleSet],
                                 a: np.ndarray, tol: float) -> ConcentricReport:
    """Check the two defining conditions of a concentric collection on samples.

    Exact equalities are unattainable on finite samples, so constants c1, c2
    are fitted (median of the per-index ratios) and each ratio must lie in
    the band [c - tol, c + tol].
    """
    if not collection:
        raise ValueError("collection must be non-empty")
    a = np.asarray(a, dtype=float)
    if len(a) < len(collection):
        raise ValueError("need one a_n per sphere")
    if np.any(np.diff(a[: len(collection)]) >= 0):
        raise ValueError("a must be strictly decreasing")
    h_ratios = []
    for n, S in enumerate(collection):
        max_norm = float(np.sqrt((S.points**2).sum(axis=1)).max())
        h_ratios.append(max_norm / a[n])
    g_ratios = []
    for n in range(len(collection) - 1):
        gap = set_distance(collection[n], collection[n + 1])
        g_ratios.append(gap / (a[n] - a[n + 1]))
    c1 = float(np.median(h_ratios))
    c2 = float(np.median(g_ratios)) if g_ratios else c1
    bad_h = [n for n, r in enumerate(h_ratios) if abs(r - c1) > tol]
    bad_g = [n for n, r in enumerate(g_ratios) if abs(r - c2) > tol]
    return ConcentricReport(
        hausdorff_ratios=h_ratios, gap_ratios=g_ratios,
        c1=c1, c2=c2, tol=tol,
        failed_hausdorff=bad_h, failed_gaps=bad_g,
    )
