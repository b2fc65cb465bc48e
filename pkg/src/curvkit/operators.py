"""Truncated singular integrals on discrete measures and the curvature identity.

Truncation is closed everywhere: an atom at distance exactly ``eps`` is
kept.  With ``K_ij = K(z_i - z_j)`` masked to admissible pairs and
``A_jk = [|z_j - z_k| >= eps]``,

    sum over ordered admissible triples of p_K  = 3 * sum_i w_i (B A B^T)_ii
    sum over ordered admissible triples of c^2  = 6 * sum_i w_i Re (B A B^H)_ii

where ``B_ij = K_ij w_j``.  The factor 3 (resp. 6) is the number of terms
in ``p_K`` (resp. the six orderings in ``c^2``), each of which contributes
the same amount once summed over all ordered triples.  This turns the
triple sum into row blocks of matrix products, one per worker task.

Since ``|T 1(z_i)|^2 = sum_{j,k} B_ij conj(B_ik)``, splitting ``j = k`` off
gives the discrete identity

    ||T_eps 1||^2 = (1/3) p_eps(mu) + diagonal      (real kernels)
    ||T_eps 1||^2 = (1/6) c^2_eps(mu) + diagonal    (1/z)

exactly whenever ``eps`` is below the minimum gap between atoms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadT, TooManyAtoms
from .kernels import Cauchy, Combo, Kappa, KernelSpec, kernel_array
from .measures import DiscreteMeasure

MAX_ATOMS = 2000
ROW_BLOCK = 64


def pairwise_sum(values) -> float:
    """Sum by a fixed-shape binary tree keyed to array position."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0])


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not eps > 0:
        raise ValueError(f"truncation radius must be positive, got {eps}")
    return eps


def _pair_matrices(spec: KernelSpec, mu: DiscreteMeasure, eps: float):
    z = mu.points
    diff = z[:, None] - z[None, :]
    adm = np.abs(diff) >= eps
    with np.errstate(divide="ignore", invalid="ignore"):
        k = kernel_array(spec, np.where(adm, diff, 1.0))
    k = np.where(adm, k, 0.0)
    return k, adm


def truncated_transform(spec: KernelSpec, mu: DiscreteMeasure, z, eps: float):
    """``sum_{|zeta - z| >= eps} K(z - zeta) w(zeta)``; complex for ``Cauchy``."""
    eps = _check_eps(eps)
    z = complex(z)
    d = z - mu.points
    keep = np.abs(d) >= eps
    if not keep.any():
        return 0j if isinstance(spec, Cauchy) else 0.0
    vals = kernel_array(spec, d[keep]) * mu.weights[keep]
    if isinstance(spec, Cauchy):
        return complex(np.sum(vals))
    return float(np.sum(vals))


def transform_on_support(spec: KernelSpec, mu: DiscreteMeasure, eps: float) -> np.ndarray:
    """``T_eps 1`` evaluated at every atom."""
    k, _ = _pair_matrices(spec, mu, _check_eps(eps))
    return k @ mu.weights


def t1_norm_sq(spec: KernelSpec, mu: DiscreteMeasure, eps: float) -> float:
    """``||T_eps 1||^2`` in ``L^2(mu)``."""
    vals = transform_on_support(spec, mu, eps)
    return pairwise_sum(mu.weights * np.abs(vals) ** 2)


def _row_block_values(b_rows, a, w_rows, cauchy: bool):
    c = b_rows @ a
    if cauchy:
        return w_rows * np.real(np.sum(c * np.conj(b_rows), axis=1))
    return w_rows * np.sum(c * b_rows, axis=1)


def truncated_permutation_sum(spec: KernelSpec, mu: DiscreteMeasure, eps: float,
                              threads: int | None = None, allow_large: bool = False) -> float:
    """Sum of ``p_K`` (or ``c^2`` for ``Cauchy``) times the weight product
    over ordered atom triples whose pairwise distances are all ``>= eps``.

    Work is split into fixed row blocks; per-atom contributions are reduced
    by :func:`pairwise_sum`, so the result does not depend on ``threads``.
    """
    eps = _check_eps(eps)
    if len(mu) > MAX_ATOMS and not allow_large:
        raise TooManyAtoms(f"{len(mu)} atoms exceeds the {MAX_ATOMS} atom cap; pass allow_large=True")
    if len(mu) < 3:
        return 0.0
    cauchy = isinstance(spec, Cauchy)
    k, adm = _pair_matrices(spec, mu, eps)
    w = mu.weights
    b = k * w[None, :]
    a = adm.astype(float)
    n = len(mu)
    starts = list(range(0, n, ROW_BLOCK))
    per_atom = np.empty(n)

    def work(s):
        e = min(s + ROW_BLOCK, n)
        per_atom[s:e] = _row_block_values(b[s:e], a, w[s:e], cauchy)

    workers = max(1, int(threads or os.cpu_count() or 1))
    if workers == 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, starts))
    return (6.0 if cauchy else 3.0) * pairwise_sum(per_atom)


@dataclass(frozen=True)
class MVReport:
    lhs: float
    triple_term: float
    residual: float
    diagonal_oracle: float
    mass: float
    # max over atoms x of sum_y |K(x - y)|^2 w(y); diagonal <= bound_constant * mass
    bound_constant: float
    # eps below the minimum gap, where residual equals the diagonal exactly
    exact_regime: bool

    def as_dict(self) -> dict:
        return asdict(self)


def mv_residual(spec: KernelSpec, mu: DiscreteMeasure, eps: float,
                threads: int | None = None, allow_large: bool = False) -> MVReport:
    """Split ``||T_eps 1||^2`` into the triple term and the residual.

    ``triple_term`` is ``p_eps(mu) / 3`` for real kernels and
    ``c^2_eps(mu) / 6`` for ``1/z``; ``residual = lhs - triple_term``.
    ``diagonal_oracle`` is the independent pairwise expansion
    ``sum_{x != y, |x - y| >= eps} |K(x - y)|^2 w(x) w(y)^2``.
    """
    eps = _check_eps(eps)
    lhs = t1_norm_sq(spec, mu, eps)
    total = truncated_permutation_sum(spec, mu, eps, threads=threads, allow_large=allow_large)
    triple = total / (6.0 if isinstance(spec, Cauchy) else 3.0)
    k, _ = _pair_matrices(spec, mu, eps)
    row = (np.abs(k) ** 2) @ mu.weights
    diag = pairwise_sum(mu.weights * ((np.abs(k) ** 2) @ (mu.weights ** 2)))
    return MVReport(
        lhs=lhs,
        triple_term=triple,
        residual=lhs - triple,
        diagonal_oracle=diag,
        mass=mu.total_mass,
        bound_constant=float(row.max()) if row.size else 0.0,
        exact_regime=eps < mu.min_gap(),
    )


@dataclass(frozen=True)
class NormChain:
    """Both sides of the two norm inequalities with their slack (rhs - lhs)."""

    t: float
    eps: float
    norm_kappa1: float
    norm_kappa2: float
    norm_kt: float
    residual_kappa1: float
    residual_kappa2: float
    constant: float
    kappa_lhs: float
    kappa_rhs: float
    kappa_slack: float
    t_lhs: float
    t_rhs: float
    t_slack: float

    @property
    def holds(self) -> bool:
        return self.kappa_slack >= 0 and self.t_slack >= 0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return d


def norm_chain(mu: DiscreteMeasure, eps: float, t: float,
               threads: int | None = None, allow_large: bool = False) -> NormChain:
    """Check ``||T_k2 1|| <= sqrt2 ||T_k1 1|| + C`` and the bound on ``||T_k1 1||``
    through ``||T_{k_t} 1||`` for ``|t| > sqrt2``, with the explicit constant
    ``C = sqrt(|R_kappa2| + 2 |R_kappa1|)`` taken from the computed residuals.
    """
    eps = _check_eps(eps)
    t = float(t)
    if not abs(t) > math.sqrt(2.0):
        raise BadT(f"need |t| > sqrt(2), got {t}")
    r1 = mv_residual(Kappa(1), mu, eps, threads, allow_large)
    r2 = mv_residual(Kappa(2), mu, eps, threads, allow_large)
    n1, n2 = math.sqrt(r1.lhs), math.sqrt(r2.lhs)
    nt = math.sqrt(t1_norm_sq(Combo(1, 2, t), mu, eps))
    const = math.sqrt(abs(r2.residual) + 2.0 * abs(r1.residual))
    kappa_rhs = math.sqrt(2.0) * n1 + const
    t_rhs = (nt + const) / (abs(t) - math.sqrt(2.0))
    return NormChain(
        t=t, eps=eps,
        norm_kappa1=n1, norm_kappa2=n2, norm_kt=nt,
        residual_kappa1=r1.residual, residual_kappa2=r2.residual,
        constant=const,
        kappa_lhs=n2, kappa_rhs=kappa_rhs, kappa_slack=kappa_rhs - n2,
        t_lhs=n1, t_rhs=t_rhs, t_slack=t_rhs - n1,
    )
