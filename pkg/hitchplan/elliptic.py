"""
Jacobi elliptic functions and complete elliptic integrals.

Everything here takes the MODULUS k (0 <= k < 1), not the parameter m = k**2
that scipy.special expects. Convert at this boundary only.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import ellipe, ellipj, ellipk

from .exceptions import DomainError


@dataclass(frozen=True)
class Modulus:
    """Elliptic modulus k with 0 <= k < 1."""

    k: float

    def __post_init__(self):
        k = float(self.k)
        if not np.isfinite(k) or k < 0.0 or k >= 1.0:
            raise DomainError(f"Elliptic modulus must satisfy 0 <= k < 1, got {self.k!r}.")
        object.__setattr__(self, 'k', k)

    @property
    def m(self) -> float:
        return self.k * self.k

    def __float__(self):
        return self.k


ModulusLike = Union[Modulus, float]


def _k(k: ModulusLike) -> float:
    return k.k if isinstance(k, Modulus) else Modulus(k).k


def complete_K(k: ModulusLike) -> float:
    """Complete elliptic integral of the first kind, K(k)."""
    return float(ellipk(_k(k) ** 2))


def complete_E(k: ModulusLike) -> float:
    """Complete elliptic integral of the second kind, E(k); defined on [0, 1]."""
    if isinstance(k, Modulus):
        value = k.k
    else:
        value = float(k)
        if not np.isfinite(value) or value < 0.0 or value > 1.0:
            raise DomainError(f"complete_E needs 0 <= k <= 1, got {k!r}.")
    return float(ellipe(value * value))


def jacobi_sn_cn_dn(u, k: ModulusLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    sn, cn, dn at u (scalar or array) for modulus k, computed jointly.

    Scalars in, floats out; arrays in, arrays out.
    """
    m = _k(k) ** 2
    sn, cn, dn, _ = ellipj(u, m)
    if np.ndim(sn) == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


@lru_cache(maxsize=1)
def solve_k0() -> Modulus:
    """
    Modulus of the closed figure-eight elastica: the root of 2E(k) - K(k) in (0, 1).

    Computed once and cached.
    """
    def closure(k):
        m = k * k
        return 2.0 * ellipe(m) - ellipk(m)

    root = brentq(closure, 0.5, 0.99, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    return Modulus(root)
