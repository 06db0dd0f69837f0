"""Closed-form ground-state constants for positive-symbol generators.

For a finite-dimensional generator with positive classical symbol the
quadratic Hamiltonian is bounded below with

    inf H_I = (1/2) Tr sqrt(M/4) - (1/2) Tr h,

where ``M/4`` is the block matrix returned by :func:`sigma_beta_sq`.
Its 2d eigenvalues are the doubled products of paired symplectic
eigenvalues of the symbol, so the trace of the square root collapses to
a sum of d square-rooted products.  The type-II normalization shifts
H_I up by exactly ``-inf H_I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .symplectic import Generator, classical_symbol_min

__all__ = ["InfimumReport", "sigma_beta_sq", "inf_HI"]

#: Eigenvalues of the squared-symbol matrix are clamped to zero above this.
PSD_CLAMP = 1e-10

#: Generators with symbol minimum below this are rejected as unbounded below.
SYMBOL_TOL = 1e-10


@dataclass(frozen=True)
class InfimumReport:
    """Ground-state constants of a positive-symbol generator."""

    symbol_min: float
    inf_HI: float
    cII_shift: float
    symplectic_eigen_products: list[float]


def sigma_beta_sq(gen: Generator) -> np.ndarray:
    """The 2d x 2d matrix ``-(sigma beta)^2`` of the squared symbol.

    Block form ``(1/4) [[hb^2 - vb v, hb vb - vb h], [h v - v hb, h^2 - v vb]]``
    with ``hb = conj(h)``, ``vb = conj(v)``.  The matrix is similar to a
    PSD matrix whenever the symbol is positive (its spectrum is real
    nonnegative, each eigenvalue doubled), but it is Hermitian as a
    complex matrix only when ``h v == v hb``.
    """
    h, v = gen.h, gen.v
    hb, vb = h.conj(), v.conj()
    return 0.25 * np.block(
        [
            [hb @ hb - vb @ v, hb @ vb - vb @ h],
            [h @ v - v @ hb, h @ h - v @ vb],
        ]
    )


def inf_HI(gen: Generator) -> InfimumReport:
    """Ground-state constants from the trace-of-square-root formula.

    Requires ``classical_symbol_min(gen) >= -SYMBOL_TOL``; otherwise the
    Hamiltonian is unbounded below and :class:`DomainError` is raised.
    Eigenvalues of the squared-symbol matrix in ``[-PSD_CLAMP*scale, 0)``
    are clamped to zero (boundary generators such as ``|h| == |v|``
    produce exact zeros perturbed by rounding).
    """
    smin = classical_symbol_min(gen)
    scale = max(1.0, float(np.linalg.norm(gen.h, 2) + np.linalg.norm(gen.v, 2)))
    if smin < -SYMBOL_TOL * scale:
        raise DomainError(
            f"classical symbol is not positive (min {smin:.3e}); H_I is unbounded below"
        )

    m = sigma_beta_sq(gen)
    eig = np.linalg.eigvals(m)
    mscale = max(1.0, float(np.linalg.norm(m)))
    if np.max(np.abs(eig.imag)) > 1e-8 * mscale:
        raise DomainError(
            f"squared-symbol spectrum is not real (max imag {np.max(np.abs(eig.imag)):.3e})"
        )
    lam = eig.real
    if lam.min() < -PSD_CLAMP * mscale:
        raise DomainError(
            f"squared-symbol spectrum has negative eigenvalue {lam.min():.3e}"
        )
    roots = np.sqrt(np.clip(lam, 0.0, None))
    roots.sort()
    # Every product of paired symplectic eigenvalues appears twice.
    products = [float(0.5 * (roots[2 * j] + roots[2 * j + 1])) for j in range(gen.dim)]
    value = float(sum(products) - 0.5 * np.trace(gen.h).real)
    return InfimumReport(
        symbol_min=float(smin),
        inf_HI=value,
        cII_shift=-value,
        symplectic_eigen_products=products,
    )
