"""Seeded extremal searches over triples.

Samples are drawn in fixed blocks of ``BLOCK`` triples, block ``b`` from
the stream ``default_rng([seed, b])``.  Blocks may run on several threads
but are merged in block order, so reports depend only on the seed and the
sample count.  The best sampled triple is then polished by coordinate
descent on the four coordinates of ``z2`` and ``z3`` with step halving.

Samplers
--------
``uniform-box``
    ``z1 = 0``, ``z2, z3`` uniform in ``[-box, box]^2``.
``anisotropic``
    three points with ``x`` uniform in ``[-box, box]`` and ``y`` uniform in
    ``[-h box, h box]``, ``h`` log-uniform in ``[1e-3, 1]``: flat triangles
    whose sides make small angles with the horizontal.
``gamma-family``
    ``(0, -g + i, g + i)`` with ``g`` log-uniform in ``gamma_range``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadPair, NoAdmissibleSamples
from .geometry import Triple, diameter_array, menger_curvature_array
from .kernels import Kappa, KernelSpec, Combo, format_kernel
from .permutations import (
    _check_pair,
    admissible_array,
    default_clause,
    omega_big_region,
    omega_region,
    permutation_array,
    permutation_array_accurate,
)

BLOCK = 1 << 15
SAMPLERS = ("uniform-box", "anisotropic", "gamma-family")
RATIO_FLOOR = 1e-14
# normalised values within this distance of zero count as zero
SIGN_TOL = 1e-9


@dataclass(frozen=True)
class ScanConfig:
    sampler: str = "uniform-box"
    samples: int = 100_000
    seed: int = 0
    refine_steps: int = 200
    normalize: bool = True
    box: float = 1.0
    gamma_range: tuple[float, float] = (1e-2, 1e3)
    threads: int = 1

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}; choose from {SAMPLERS}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.refine_steps < 0:
            raise ValueError("refine_steps must be >= 0")
        if not self.box > 0:
            raise ValueError("box must be positive")
        lo, hi = self.gamma_range
        if not 0 < lo <= hi:
            raise ValueError("gamma_range must satisfy 0 < lo <= hi")

    def echo(self) -> dict:
        return {"sampler": self.sampler, "samples": self.samples, "seed": self.seed,
                "refine_steps": self.refine_steps, "normalize": self.normalize}


@dataclass
class ScanReport:
    min_value: float
    max_value: float
    argmin: Optional[Triple]
    argmax: Optional[Triple]
    evaluations: int
    config: ScanConfig
    kernel: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.config.seed

    def to_dict(self) -> dict:
        def tri(t):
            return None if t is None else t.as_lists()

        d = {"kernel": self.kernel, "config": self.config.echo(),
             "min_value": self.min_value, "argmin": tri(self.argmin),
             "max_value": self.max_value, "argmax": tri(self.argmax),
             "evaluations": self.evaluations}
        d.update(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# sampling


def sample_block(cfg: ScanConfig, block: int, size: int):
    rng = np.random.default_rng([cfg.seed, block])
    b = cfg.box
    if cfg.sampler == "uniform-box":
        z1 = np.zeros(size, dtype=complex)
        z2 = rng.uniform(-b, b, size) + 1j * rng.uniform(-b, b, size)
        z3 = rng.uniform(-b, b, size) + 1j * rng.uniform(-b, b, size)
    elif cfg.sampler == "anisotropic":
        h = b * 10.0 ** rng.uniform(-3.0, 0.0, size)
        z1, z2, z3 = (rng.uniform(-b, b, size) + 1j * h * rng.uniform(-1, 1, size) for _ in range(3))
        z1, z2, z3 = np.zeros(size, dtype=complex), z2 - z1, z3 - z1
    else:
        lo, hi = cfg.gamma_range
        g = np.exp(rng.uniform(math.log(lo), math.log(hi), size))
        z1 = np.zeros(size, dtype=complex)
        z2, z3 = -g + 1j, g + 1j
    return z1, z2, z3


def _blocks(total: int):
    return [(b, min(BLOCK, total - b * BLOCK)) for b in range((total + BLOCK - 1) // BLOCK)]


def _map_blocks(fn, blocks, threads):
    if threads <= 1 or len(blocks) <= 1:
        return [fn(*b) for b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(*b), blocks))


Objective = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _extremes(objective: Objective, cfg: ScanConfig):
    """Sampled min and max of ``objective`` (nan entries skipped)."""

    def run(block, size):
        z = sample_block(cfg, block, size)
        v = objective(*z)
        ok = ~np.isnan(v)
        if not ok.any():
            return None
        vm = np.where(ok, v, np.inf)
        vM = np.where(ok, v, -np.inf)
        i, k = int(np.argmin(vm)), int(np.argmax(vM))
        return (vm[i], tuple(x[i] for x in z), vM[k], tuple(x[k] for x in z), int(ok.sum()))

    lo = hi = None
    valid = 0
    for res in _map_blocks(run, _blocks(cfg.samples), cfg.threads):
        if res is None:
            continue
        valid += res[4]
        if lo is None or res[0] < lo[0]:
            lo = (res[0], res[1])
        if hi is None or res[2] > hi[0]:
            hi = (res[2], res[3])
    return lo, hi, valid


def refine(objective: Objective, z, steps: int, sign: float = 1.0):
    """Coordinate descent on ``sign * objective`` moving only ``z2`` and ``z3``.

    Returns ``(value, triple, evaluations)``; the value never gets worse
    than the starting one.
    """
    z1, z2, z3 = (complex(v) for v in z)
    best = float(objective(np.array([z1]), np.array([z2]), np.array([z3]))[0])
    evals = 1
    if steps == 0 or math.isnan(best):
        return best, (z1, z2, z3), evals
    step = 0.125 * float(diameter_array(z1, z2, z3))
    floor = 1e-12 * step
    moves = np.array([1, -1, 1j, -1j])
    for _ in range(steps):
        c2 = np.concatenate([z2 + step * moves, np.full(4, z2)])
        c3 = np.concatenate([np.full(4, z3), z3 + step * moves])
        vals = sign * objective(np.full(8, z1), c2, c3)
        evals += 8
        vals = np.where(np.isnan(vals), np.inf, vals)
        k = int(np.argmin(vals))
        if vals[k] < sign * best:
            best, z2, z3 = sign * float(vals[k]), complex(c2[k]), complex(c3[k])
        else:
            step *= 0.5
            if step < floor:
                break
    return best, (z1, z2, z3), evals


def _search(objective: Objective, cfg: ScanConfig, kernel: str, extra=None) -> ScanReport:
    lo, hi, valid = _extremes(objective, cfg)
    if lo is None:
        raise NoAdmissibleSamples("every sample was rejected")
    vmin, zmin, e1 = refine(objective, lo[1], cfg.refine_steps, 1.0)
    vmax, zmax, e2 = refine(objective, hi[1], cfg.refine_steps, -1.0)
    extra = dict(extra or {})
    extra["valid_samples"] = valid
    return ScanReport(vmin, vmax, Triple(*zmin), Triple(*zmax), cfg.samples + e1 + e2,
                      cfg, kernel, extra)


# ---------------------------------------------------------------------------
# objectives


def normalized(values, z1, z2, z3, on: bool):
    """Multiply degree -2 homogeneous values by the squared diameter."""
    return values * diameter_array(z1, z2, z3) ** 2 if on else values


def permutation_objective(spec: KernelSpec, normalize: bool = True) -> Objective:
    def f(z1, z2, z3):
        return normalized(permutation_array(spec, z1, z2, z3), z1, z2, z3, normalize)
    return f


def ratio_objective(n: int, N: int) -> Objective:
    """``p_kappaN / p_kappan``; nan where the normalised denominator is below the floor."""
    def f(z1, z2, z3):
        num = permutation_array_accurate(Kappa(N), z1, z2, z3)
        den = permutation_array_accurate(Kappa(n), z1, z2, z3)
        small = normalized(den, z1, z2, z3, True) < RATIO_FLOOR
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(small, np.nan, num / den)
    return f


def constrained_objective(spec: KernelSpec, alpha0: float, tau: float, clause: str) -> Objective:
    """``p_K / c^2`` on admissible triples, nan elsewhere."""
    def f(z1, z2, z3):
        c = menger_curvature_array(z1, z2, z3)
        ok = admissible_array(z1, z2, z3, alpha0, tau, clause) & (c > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(ok, permutation_array(spec, z1, z2, z3) / (c * c), np.nan)
    return f


# ---------------------------------------------------------------------------
# searches


def sign_change_search(spec: KernelSpec, cfg: ScanConfig) -> ScanReport:
    """Extremes of (normalised) ``p_K``; a negative min and a positive max show a sign change.

    ``sign_change`` requires both extremes to clear ``SIGN_TOL`` so that
    rounding noise around zero does not count.
    """
    rep = _search(permutation_objective(spec, cfg.normalize), cfg, format_kernel(spec))
    rep.extra["sign_change"] = bool(rep.min_value < -SIGN_TOL and rep.max_value > SIGN_TOL)
    return rep


@dataclass(frozen=True)
class BoundaryPoint:
    t: float
    min_value: float
    argmin: Triple
    in_nonnegative_region: bool
    in_sign_change_interval: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmin"] = self.argmin.as_lists()
        return d


def region_boundary_scan(n: int, N: int, t_grid, cfg: ScanConfig) -> list[BoundaryPoint]:
    """Sampled minimum of normalised ``p`` for ``kappa_N + t kappa_n`` at each ``t``.

    Every ``t`` reuses the same sample stream, so differences between grid
    points reflect the kernel and not the draw.
    """
    _check_pair(n, N)
    big, small = omega_big_region(n, N), omega_region(n, N)
    out = []
    for t in t_grid:
        t = float(t)
        spec = Combo(n, N, t)
        obj = permutation_objective(spec, True)
        lo, _, _ = _extremes(obj, cfg)
        v, z, _ = refine(obj, lo[1], cfg.refine_steps, 1.0)
        out.append(BoundaryPoint(t, v, Triple(*z), t in big, t in small))
    return out


def ratio_sup_search(n: int, N: int, cfg: ScanConfig) -> ScanReport:
    """Sampled supremum of ``p_kappaN / p_kappan``, skipping near-zero denominators."""
    _check_pair(n, N)
    rep = _search(ratio_objective(n, N), cfg, f"kappa:{N}/kappa:{n}")
    rep.extra["conjectured_bound"] = N / n
    return rep


def constrained_inf_search(spec: KernelSpec, alpha0: float, tau: float, cfg: ScanConfig,
                           clause: Optional[str] = None, max_draws: Optional[int] = None) -> ScanReport:
    """Infimum of ``p_K / c^2`` over admissible triples.

    Blocks are drawn in order until ``cfg.samples`` admissible triples are
    collected (or ``max_draws``, default ``50 * samples``, is reached); only
    the first ``cfg.samples`` admissible triples in block order count.
    """
    if not 0 < alpha0 < math.pi / 2:
        raise ValueError("alpha0 must lie in (0, pi/2)")
    if tau < 1:
        raise ValueError("tau must be >= 1")
    clause = clause or default_clause(spec)
    obj = constrained_objective(spec, alpha0, tau, clause)
    max_draws = max_draws or 50 * cfg.samples
    n_blocks = (max_draws + BLOCK - 1) // BLOCK
    per_round = max(1, cfg.threads)

    def run(block, size):
        z = sample_block(cfg, block, size)
        v = obj(*z)
        ok = ~np.isnan(v)
        return v[ok], tuple(x[ok] for x in z)

    vals, trips, got, b = [], [], 0, 0
    while got < cfg.samples and b < n_blocks:
        blocks = [(k, BLOCK) for k in range(b, min(b + per_round, n_blocks))]
        for v, z in _map_blocks(run, blocks, cfg.threads):
            vals.append(v)
            trips.append(z)
            got += v.size
        b += len(blocks)
    if got == 0:
        raise NoAdmissibleSamples(f"no admissible triple in {b * BLOCK} draws")
    # count only the blocks needed to reach the target, whatever the round size
    used = int(np.searchsorted(np.cumsum([x.size for x in vals]), cfg.samples)) + 1
    b = min(b, used)
    v = np.concatenate(vals)[: cfg.samples]
    z = [np.concatenate([t[i] for t in trips])[: cfg.samples] for i in range(3)]
    i, k = int(np.argmin(v)), int(np.argmax(v))
    vmin, zmin, e1 = refine(obj, (z[0][i], z[1][i], z[2][i]), cfg.refine_steps, 1.0)
    vmax, zmax, e2 = refine(obj, (z[0][k], z[1][k], z[2][k]), cfg.refine_steps, -1.0)
    return ScanReport(vmin, vmax, Triple(*zmin), Triple(*zmax), b * BLOCK + e1 + e2, cfg,
                      format_kernel(spec),
                      {"admissible": int(v.size), "draws": b * BLOCK, "clause": clause,
                       "alpha0": alpha0, "tau": tau})
