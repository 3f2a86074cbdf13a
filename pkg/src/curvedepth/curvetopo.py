"""Monte Carlo depth of sampled curves via sphere topology.

The zero set of the homogenized sample is traced on an antipodally exact
icosphere: triangles with a sign change contribute one segment between
linearly interpolated edge crossings, segments chain into closed loops
through exact shared-edge identity, and each loop gets a winding number
about the polar axis by azimuth accumulation.  The reference point is
fixed at [0:0:1]: an oval of the projective curve encloses it exactly
when its two antipodal lifts each wind once around the axis, so the
sample's depth is the number of antipodal loop pairs of winding
magnitude one.  Pseudolines (odd degree only) appear as single
self-antipodal loops and never count toward depth.

Samples whose crossings come too close to the poles, or whose extracted
topology violates a curve invariant, raise DegenerateSample; Monte Carlo
counts and reports them rather than repairing anything.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ensembles import CoefficientScheme, SampleStream, sample, scheme_by_name
from .errors import DegenerateSample, ExcessiveDiscards
from .polynomial import MonomialRotation, PolySample, eval_sphere
from .sphere_mesh import SphereMesh, build_sphere_mesh, default_subdivision

EPS_POLE = 1e-3
MIN_LOOP_POINTS = 6
MAX_AZ_STEP = math.pi / 2

# fixed fallback rotation applied when a mesh vertex lands exactly on the curve
_RETRY_ANGLES = (0.5936532, 0.2425356)


def _retry_rotation():
    a, b = _RETRY_ANGLES
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    rz = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cb, -sb], [0.0, sb, cb]])
    return rz @ rx


def harnack_bound(degree: int) -> int:
    """Maximal component count of a smooth degree-d projective curve."""
    return 1 + (degree - 1) * (degree - 2) // 2


@dataclass(frozen=True)
class CurveLoop:
    points: np.ndarray          # (K, 3) closed polyline of unit vectors
    winding: int
    is_self_antipodal: bool
    partner: int | None         # index of the antipodal loop, None for self
    edge_ids: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class LoopSet:
    loops: list[CurveLoop]

    def __len__(self):
        return len(self.loops)


@dataclass(frozen=True)
class DepthSampleReport:
    depth: int
    n_components_rp2: int
    has_pseudoline: bool
    discarded: bool = False
    reason: str | None = None
    ray_crossings: float = 0.0  # total azimuth variation / 4pi, diagnostic


def _extract_raw(poly: PolySample, mesh: SphereMesh):
    """Chained crossing loops: list of (points, winding, |az| total, edges)."""
    verts = mesh.vertices
    vals = eval_sphere(poly, verts[:, 0], verts[:, 1], verts[:, 2])
    if np.any(vals == 0.0):
        verts = verts @ _retry_rotation().T
        vals = eval_sphere(poly, verts[:, 0], verts[:, 1], verts[:, 2])
        if np.any(vals == 0.0):
            raise DegenerateSample("vertex-zero")

    pos = vals > 0.0
    ea, eb = mesh.edges[:, 0], mesh.edges[:, 1]
    crossed = pos[ea] != pos[eb]
    ce = crossed[mesh.tri_edges]
    ncross = ce.sum(axis=1)
    if np.any(ncross == 2) is False and not np.any(ncross):
        return []
    if np.any((ncross != 0) & (ncross != 2)):
        raise DegenerateSample("open-chain")

    two = ncross == 2
    pairs = mesh.tri_edges[two][ce[two]].reshape(-1, 2)

    cross_ids = np.nonzero(crossed)[0]
    local = np.full(len(mesh.edges), -1, dtype=np.int64)
    local[cross_ids] = np.arange(len(cross_ids))
    va, vb = vals[ea[cross_ids]], vals[eb[cross_ids]]
    s = va / (va - vb)
    P = verts[ea[cross_ids]] * (1.0 - s[:, None]) + verts[eb[cross_ids]] * s[:, None]
    P /= np.linalg.norm(P, axis=1)[:, None]

    ring2 = P[:, 0] ** 2 + P[:, 1] ** 2
    if np.any(ring2 < EPS_POLE * EPS_POLE):
        raise DegenerateSample("pole-crossing")

    # each crossed edge is shared by exactly two sign-changing triangles,
    # so the link multiset gives every crossing exactly two neighbours
    lp = local[pairs]
    flat = np.concatenate([lp[:, 0], lp[:, 1]])
    mate = np.concatenate([lp[:, 1], lp[:, 0]])
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=len(cross_ids))
    if np.any(counts != 2):
        raise DegenerateSample("open-chain")
    nb = mate[order].reshape(-1, 2)

    az = np.arctan2(P[:, 1], P[:, 0])
    visited = np.zeros(len(cross_ids), dtype=bool)
    loops = []
    for start in range(len(cross_ids)):
        if visited[start]:
            continue
        seq = [start]
        visited[start] = True
        prev, cur = -1, start
        while True:
            n0, n1 = nb[cur]
            nxt = int(n1) if n0 == prev else int(n0)
            if nxt == start:
                break
            seq.append(nxt)
            visited[nxt] = True
            prev, cur = cur, nxt
        idx = np.array(seq, dtype=np.int64)
        if len(idx) < MIN_LOOP_POINTS:
            raise DegenerateSample("short-loop")
        a = az[idx]
        d = np.diff(a, append=a[:1])
        d = (d + math.pi) % (2.0 * math.pi) - math.pi
        if np.max(np.abs(d)) > MAX_AZ_STEP:
            raise DegenerateSample("pole-passage")
        total = float(np.sum(d))
        w = round(total / (2.0 * math.pi))
        if abs(total / (2.0 * math.pi) - w) >= 0.1:
            raise DegenerateSample("winding-ambiguous")
        if abs(w) > 1:
            raise DegenerateSample("winding-magnitude")
        loops.append((P[idx], int(w), float(np.sum(np.abs(d))), cross_ids[idx]))
    return loops


def extract_loops(poly: PolySample, mesh: SphereMesh) -> LoopSet:
    """Closed zero-set polylines with winding and antipodal pairing."""
    raw = _extract_raw(poly, mesh)
    keysets = [frozenset(edge_ids.tolist()) for _, _, _, edge_ids in raw]
    by_key = {ks: i for i, ks in enumerate(keysets)}
    loops = []
    for i, (pts, w, tv, edge_ids) in enumerate(raw):
        anti = frozenset(mesh.edge_antipode[edge_ids].tolist())
        if anti == keysets[i]:
            loops.append(CurveLoop(pts, w, True, None, edge_ids))
            continue
        j = by_key.get(anti)
        if j is None:
            raise DegenerateSample("pair-mismatch")
        loops.append(CurveLoop(pts, w, False, j, edge_ids))
    return LoopSet(loops)


def winding(loop: CurveLoop) -> int:
    """Azimuth-accumulation winding of a closed polyline about the z-axis."""
    P = np.asarray(loop.points, dtype=float)
    ring2 = P[:, 0] ** 2 + P[:, 1] ** 2
    if np.any(ring2 < EPS_POLE * EPS_POLE):
        raise DegenerateSample("pole-crossing")
    a = np.arctan2(P[:, 1], P[:, 0])
    d = np.diff(a, append=a[:1])
    d = (d + math.pi) % (2.0 * math.pi) - math.pi
    total = float(np.sum(d))
    w = round(total / (2.0 * math.pi))
    if abs(total / (2.0 * math.pi) - w) >= 0.1:
        raise DegenerateSample("winding-ambiguous")
    return int(w)


def depth_of_sample(poly: PolySample, mesh: SphereMesh) -> DepthSampleReport:
    """Depth, component count and pseudoline flag for one sample.

    Raises DegenerateSample whenever the extracted topology violates a
    curve invariant; a violation is never silently repaired.
    """
    loopset = extract_loops(poly, mesh)
    d = poly.degree
    n_self = sum(1 for lp in loopset.loops if lp.is_self_antipodal)
    n_pairs, depth = 0, 0
    seen = set()
    for i, lp in enumerate(loopset.loops):
        if lp.is_self_antipodal or i in seen:
            continue
        j = lp.partner
        seen.add(i)
        seen.add(j)
        other = loopset.loops[j]
        if other.partner != i or abs(other.winding) != abs(lp.winding):
            raise DegenerateSample("pair-mismatch")
        n_pairs += 1
        if abs(lp.winding) == 1:
            depth += 1

    has_pseudoline = n_self > 0
    if has_pseudoline != (d % 2 == 1) or n_self > 1:
        raise DegenerateSample("pseudoline-parity")
    if any(abs(lp.winding) != 1 for lp in loopset.loops if lp.is_self_antipodal):
        raise DegenerateSample("pseudoline-winding")
    n_components = n_pairs + n_self
    if depth > d // 2:
        raise DegenerateSample("depth-bound")
    if n_components > harnack_bound(d):
        raise DegenerateSample("harnack-bound")
    tv = sum(_loop_tv(lp) for lp in loopset.loops)
    return DepthSampleReport(
        depth=depth,
        n_components_rp2=n_components,
        has_pseudoline=has_pseudoline,
        ray_crossings=tv / (4.0 * math.pi),
    )


def _loop_tv(loop: CurveLoop) -> float:
    a = np.arctan2(loop.points[:, 1], loop.points[:, 0])
    d = np.diff(a, append=a[:1])
    d = (d + math.pi) % (2.0 * math.pi) - math.pi
    return float(np.sum(np.abs(d)))


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    stderr: float
    histogram: np.ndarray       # histogram[k] = #samples of depth k
    discarded: int
    trials: int
    ray_crossing_mean: float    # diagnostic: mean azimuth variation / 2pi
    ray_crossing_stderr: float
    subdivision_level: int
    first_loops: LoopSet | None = None

    @property
    def n_effective(self):
        return self.trials - self.discarded


def monte_carlo_depth(scheme, degree, trials, seed, mesh_cfg=None,
                      threads=1, rotation=None, keep_first_loops=False,
                      max_discard_fraction=0.10) -> MonteCarloResult:
    """Seeded Monte Carlo estimate of the expected depth.

    Results are bitwise identical for fixed (seed, trials, mesh_cfg),
    independent of `threads`: every trial is a pure function of
    (seed, trial index) and reduction happens in trial order.
    `rotation` (orthogonal 3x3) is applied to every sampled polynomial
    through the degree-d action on monomials; the reference point stays
    at [0:0:1].
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(scheme, str):
        scheme = scheme_by_name(scheme, degree)
    elif scheme.degree != degree:
        raise ValueError("scheme degree disagrees with requested degree")
    hdeg = scheme.homogenization_degree
    level = mesh_cfg if mesh_cfg is not None else default_subdivision(hdeg)
    mesh = build_sphere_mesh(level)
    stream = SampleStream(master_seed=seed)
    rot = np.asarray(rotation, dtype=float) if rotation is not None else None
    rotator = MonomialRotation(hdeg, rot) if rot is not None else None

    def make_poly(k):
        poly = sample(scheme, stream, k)
        return rotator.apply(poly) if rotator is not None else poly

    def run_trial(k):
        try:
            rep = depth_of_sample(make_poly(k), mesh)
        except DegenerateSample as exc:
            return None, exc.reason
        return rep, None

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_trial, range(trials), chunksize=16))
    else:
        outcomes = [run_trial(k) for k in range(trials)]

    depths, rays = [], []
    first_loops = None
    discarded = 0
    for k, (rep, why) in enumerate(outcomes):
        if rep is None:
            discarded += 1
            continue
        depths.append(rep.depth)
        rays.append(rep.ray_crossings)
        if keep_first_loops and first_loops is None:
            first_loops = extract_loops(make_poly(k), mesh)

    if trials >= 50 and discarded > max_discard_fraction * trials:
        raise ExcessiveDiscards(
            f"{discarded}/{trials} trials discarded "
            f"(> {max_discard_fraction:.0%})"
        )
    if not depths:
        raise ExcessiveDiscards("all trials discarded")
    depths = np.array(depths)
    rays = np.array(rays)
    n = len(depths)
    mean = float(depths.mean())
    stderr = float(depths.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    rmean = float(rays.mean())
    rerr = float(rays.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    return MonteCarloResult(
        mean=mean,
        stderr=stderr,
        histogram=np.bincount(depths),
        discarded=discarded,
        trials=trials,
        ray_crossing_mean=rmean,
        ray_crossing_stderr=rerr,
        subdivision_level=level,
        first_loops=first_loops,
    )


def emit_loops(loopset: LoopSet, fh):
    """Write loops as plain text: header line then X Y Z rows, 'end' footer."""
    for i, lp in enumerate(loopset.loops):
        fh.write(
            f"loop {i} winding {lp.winding} "
            f"self_antipodal {int(lp.is_self_antipodal)}\n"
        )
        for p in lp.points:
            fh.write(f"{p[0]:.9f} {p[1]:.9f} {p[2]:.9f}\n")
        fh.write("end\n")


@dataclass(frozen=True)
class MollifiedGrid:
    """Polar midpoint grid with local radial refinement near the curve.

    The coarse pass locates radial cells that can meet {|f| <= eps}
    (sign change against a neighbour, or |f| within 3 eps); flagged cells
    are re-integrated with midpoints fine enough to place at least
    `band_points` nodes across the local band width 2 eps / |df/dr|.
    """

    r_cut: float = 50.0
    n_theta: int = 512
    coarse_dr: float = 0.02
    band_points: int = 16
    max_subcells: int = 8192


def mollified_count(poly: PolySample, epsilon: float,
                    grid_cfg: MollifiedGrid | None = None) -> float:
    """Box-mollified counting integral over the plane.

    value = (1/2 pi) iint 1{|f|<=eps}/(2 eps) |x f_x + y f_y|
            dx dy / (x^2 + y^2),
    by the midpoint rule in polar coordinates.  As eps -> 0 the value
    approaches the azimuth total variation of the curve / 2 pi; for every
    oval enclosing the origin that contribution is exactly 1.
    """
    from .polynomial import eval_affine_grid

    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if poly.degree % 2 == 1:
        raise ValueError(
            "mollified counting requires even degree: the pseudoline term "
            "of an odd-degree curve keeps the limit away from an integer"
        )
    f00 = poly.coeffs[0, 0]
    if f00 == 0.0:
        raise ValueError("the reference point must avoid the curve: f(0,0) != 0")
    cfg = grid_cfg or MollifiedGrid()

    n_r = int(np.ceil(cfg.r_cut / cfg.coarse_dr))
    dr = cfg.r_cut / n_r
    r = (np.arange(n_r) + 0.5) * dr
    dth = 2.0 * math.pi / cfg.n_theta
    total = 0.0
    inv2eps = 0.5 / epsilon

    theta_chunk = max(1, int(4e6) // n_r)
    for t0 in range(0, cfg.n_theta, theta_chunk):
        th = (np.arange(t0, min(t0 + theta_chunk, cfg.n_theta)) + 0.5) * dth
        ct, st = np.cos(th)[:, None], np.sin(th)[:, None]
        f, _ = eval_affine_grid(poly, r[None, :] * ct, r[None, :] * st)
        inband = np.abs(f) <= 3.0 * epsilon
        d = np.signbit(f[:, 1:]) != np.signbit(f[:, :-1])
        flag = inband.copy()
        flag[:, 1:] |= inband[:, :-1]
        flag[:, :-1] |= inband[:, 1:]
        flag[:, 1:] |= d
        flag[:, :-1] |= d
        rows, cols = np.nonzero(flag)
        if len(rows) == 0:
            continue
        # local slope from coarse neighbours decides the fine step
        fr = np.gradient(f, dr, axis=1)
        slope = np.maximum(np.abs(fr[rows, cols]), 1e-12)
        width = 2.0 * epsilon / slope
        sub = np.clip(
            np.ceil(cfg.band_points * dr / width).astype(np.int64),
            cfg.band_points, cfg.max_subcells,
        )
        for m in np.unique(sub):
            sel = sub == m
            rr, cc = rows[sel], cols[sel]
            offs = (np.arange(m) + 0.5) / m * dr
            rf = (cc * dr)[:, None] + offs[None, :]
            xf = rf * np.cos(th[rr])[:, None]
            yf = rf * np.sin(th[rr])[:, None]
            ff, tt = eval_affine_grid(poly, xf, yf)
            mask = np.abs(ff) <= epsilon
            contrib = np.where(mask, np.abs(tt) / rf, 0.0)
            total += inv2eps * contrib.sum() * (dr / m) * dth
    return total / (2.0 * math.pi)
