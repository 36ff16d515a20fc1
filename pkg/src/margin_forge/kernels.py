"""Kernel functions over feature vectors: linear, polynomial, RBF."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from margin_forge.errors import ParseError
from margin_forge.vectors import FeatureVector, check_same_dim


@dataclass(frozen=True)
class LinearKernel:
    """Plain inner product: K(a, b) = <a, b>."""


@dataclass(frozen=True)
class PolynomialKernel:
    """K(a, b) = (gamma * <a, b> + coef0) ** degree."""

    degree: int
    coef0: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not isinstance(self.degree, int) or self.degree < 1:
            raise ValueError(f"degree must be an integer >= 1, got {self.degree!r}")
        if not math.isfinite(self.coef0):
            raise ValueError("coef0 must be finite")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma!r}")


@dataclass(frozen=True)
class RbfKernel:
    """K(a, b) = exp(-gamma * ||a - b||^2)."""

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma!r}")


Kernel = Union[LinearKernel, PolynomialKernel, RbfKernel]


def kernel_matrix(
    kernel: Kernel,
    a: np.ndarray,
    b: np.ndarray,
    a_sqnorms: np.ndarray | None = None,
    b_sqnorms: np.ndarray | None = None,
) -> np.ndarray:
    """K[i, j] = k(a[i], b[j]) for dense row matrices a (m, d) and b (n, d).

    For the RBF kernel, squared row norms may be passed in to avoid
    recomputation in tight loops.
    """
    dots = a @ b.T
    if isinstance(kernel, LinearKernel):
        return dots
    if isinstance(kernel, PolynomialKernel):
        return (kernel.gamma * dots + kernel.coef0) ** kernel.degree
    if a_sqnorms is None:
        a_sqnorms = np.einsum("ij,ij->i", a, a)
    if b_sqnorms is None:
        b_sqnorms = np.einsum("ij,ij->i", b, b)
    sq_dists = np.maximum(a_sqnorms[:, None] + b_sqnorms[None, :] - 2.0 * dots, 0.0)
    return np.exp(-kernel.gamma * sq_dists)


def kernel_eval(kernel: Kernel, a: FeatureVector, b: FeatureVector) -> float:
    """Evaluate K(a, b) for a single pair of feature vectors.

    Symmetric in its arguments; raises DimensionError on a dim mismatch.
    The RBF branch computes the squared distance directly from the
    coordinate differences, so k(x, x) is exactly 1.
    """
    check_same_dim(a, b)
    da, db = a.to_dense(), b.to_dense()
    if isinstance(kernel, LinearKernel):
        return float(da @ db)
    if isinstance(kernel, PolynomialKernel):
        return float((kernel.gamma * (da @ db) + kernel.coef0) ** kernel.degree)
    diff = da - db
    return float(np.exp(-kernel.gamma * (diff @ diff)))


def kernel_to_text(kernel: Kernel) -> str:
    """Serialize a kernel to its one-line text descriptor."""
    if isinstance(kernel, LinearKernel):
        return "linear"
    if isinstance(kernel, RbfKernel):
        return f"rbf {kernel.gamma:.17g}"
    return f"polynomial {kernel.degree} {kernel.coef0:.17g} {kernel.gamma:.17g}"


def kernel_from_text(text: str) -> Kernel:
    """Parse a kernel descriptor produced by :func:`kernel_to_text`."""
    parts = text.split()
    try:
        if parts[0] == "linear" and len(parts) == 1:
            return LinearKernel()
        if parts[0] == "rbf" and len(parts) == 2:
            return RbfKernel(gamma=float(parts[1]))
        if parts[0] == "polynomial" and len(parts) == 4:
            return PolynomialKernel(
                degree=int(parts[1]), coef0=float(parts[2]), gamma=float(parts[3])
            )
    except ValueError as exc:
        raise ParseError(f"bad kernel descriptor {text!r}: {exc}") from exc
    raise ParseError(f"bad kernel descriptor {text!r}")
