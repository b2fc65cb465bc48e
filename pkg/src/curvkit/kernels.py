"""Real kernels ``kappa_m``, their combinations ``kappa_N + t*kappa_n``, and ``1/z``.

``kappa_m(z) = (Re z)^(2m-1) / |z|^(2m)``.  The combination with
``(n, N) = (1, 2)`` is the one-parameter family ``k_t``; it is just
``Combo(1, 2, t)``, there is no separate variant.

Kernel text form (CLI): ``kappa:m``, ``combo:n:N:t``, ``cauchy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import BadPair, WrongVariant, ZeroArgument


@dataclass(frozen=True)
class Kappa:
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise BadPair(f"kappa order must be a positive integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))


@dataclass(frozen=True)
class Combo:
    n: int
    N: int
    t: float

    def __post_init__(self):
        if int(self.n) != self.n or int(self.N) != self.N or self.n < 1:
            raise BadPair(f"orders must be positive integers, got ({self.n}, {self.N})")
        if self.n > self.N:
            raise BadPair(f"need n <= N, got ({self.n}, {self.N})")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class Cauchy:
    pass


KernelSpec = Union[Kappa, Combo, Cauchy]


def k_t(t: float) -> Combo:
    return Combo(1, 2, t)


def parse_kernel(text: str) -> KernelSpec:
    """Parse ``kappa:m``, ``combo:n:N:t`` or ``cauchy``."""
    parts = text.strip().split(":")
    head = parts[0].lower()
    try:
        if head == "cauchy" and len(parts) == 1:
            return Cauchy()
        if head == "kappa" and len(parts) == 2:
            return Kappa(int(parts[1]))
        if head == "combo" and len(parts) == 4:
            return Combo(int(parts[1]), int(parts[2]), float(parts[3]))
    except ValueError as exc:
        if isinstance(exc, BadPair):
            raise
        raise BadPair(f"malformed kernel {text!r}: {exc}") from None
    raise BadPair(f"unknown kernel form {text!r}")


def format_kernel(spec: KernelSpec) -> str:
    if isinstance(spec, Kappa):
        return f"kappa:{spec.m}"
    if isinstance(spec, Combo):
        return f"combo:{spec.n}:{spec.N}:{spec.t!r}"
    return "cauchy"


def ipow(x, k: int):
    """``x**k`` for a non-negative integer ``k`` by repeated squaring."""
    result = np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    base = x
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def kappa_array(m: int, z):
    """``kappa_m`` on a complex array; zero entries give ``nan``.

    The argument is first divided by its larger coordinate, using
    ``kappa_m(s z) = kappa_m(z) / s``, so the powers neither underflow nor
    overflow.
    """
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.maximum(np.abs(z.real), np.abs(z.imag))
        x, y = z.real / s, z.imag / s
        return x * ipow(x * x, m - 1) / ipow(x * x + y * y, m) / s


def real_kernel_array(spec: KernelSpec, z):
    if isinstance(spec, Kappa):
        return kappa_array(spec.m, z)
    if isinstance(spec, Combo):
        return kappa_array(spec.N, z) + spec.t * kappa_array(spec.n, z)
    raise WrongVariant("the Cauchy kernel is complex valued")


def cauchy_array(z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / z


def eval_real(spec: KernelSpec, z) -> float:
    if isinstance(spec, Cauchy):
        raise WrongVariant("eval_real needs a real kernel; use eval_cauchy")
    z = complex(z)
    if z == 0:
        raise ZeroArgument("kernel evaluated at 0")
    return float(real_kernel_array(spec, z))


def eval_cauchy(z) -> complex:
    z = complex(z)
    if z == 0:
        raise ZeroArgument("kernel evaluated at 0")
    return complex(cauchy_array(z))


def kernel_array(spec: KernelSpec, z):
    """Kernel values on an array, real or complex depending on the variant."""
    if isinstance(spec, Cauchy):
        return cauchy_array(z)
    return real_kernel_array(spec, z)


def cz_size_ratio(spec: KernelSpec, samples: int = 100_000, seed: int = 0) -> float:
    """Empirical ``sup |z| |K(z)|`` over seeded samples.

    Radii are log-uniform on ``[1e-3, 1e3]`` and arguments uniform on the
    circle; the kernels are homogeneous, so only the argument matters.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    r = 10.0 ** rng.uniform(-3, 3, samples)
    phi = rng.uniform(0, 2 * math.pi, samples)
    z = r * np.exp(1j * phi)
    return float(np.max(np.abs(z) * np.abs(kernel_array(spec, z))))
