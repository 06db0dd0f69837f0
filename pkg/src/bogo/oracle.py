"""Independent brute-force oracles: dense propagators, spectral infima,
finite-difference generators.

Everything here deliberately avoids the closed-form paths it checks:
infima come from dense Hermitian eigensolves of the truncated
Hamiltonian at increasing cutoffs, propagators from spectral calculus,
and the generator from a central difference of the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, PreconditionError
from .fock import FockOperator, FockSpace, build_space, hamiltonian_HI
from .implementer import u_type1
from .symplectic import Generator

__all__ = ["ConvergenceSeries", "brute_inf", "propagator", "finite_diff_generator", "aitken"]


@dataclass(frozen=True)
class ConvergenceSeries:
    """Values of a quantity at increasing cutoffs plus an extrapolated limit."""

    cutoffs: list[int]
    values: list[float]
    extrapolated: float
    monotone: bool


def aitken(values) -> float:
    """Aitken delta-squared extrapolation from the last three values.

    Assumes roughly geometric convergence; falls back to the last value
    when the difference ratio degenerates.
    """
    v = list(values)
    if len(v) < 3:
        return float(v[-1])
    x1, x2, x3 = v[-3], v[-2], v[-1]
    denom = (x3 - x2) - (x2 - x1)
    if abs(denom) < 1e-300:
        return float(x3)
    return float(x3 - (x3 - x2) ** 2 / denom)


def brute_inf(gen: Generator, cutoffs) -> ConvergenceSeries:
    """Minimum eigenvalue of the truncated Hamiltonian at each cutoff.

    Variational principle: values are nonincreasing in the cutoff.  For
    positive-symbol generators they converge (geometrically) down to the
    trace-formula value; otherwise they diverge to -infinity.
    """
    if gen.dim > 3:
        raise PreconditionError(f"brute-force infimum supports d <= 3, got d = {gen.dim}")
    cutoffs = [int(c) for c in cutoffs]
    if sorted(cutoffs) != cutoffs or len(set(cutoffs)) != len(cutoffs):
        raise InputError("cutoffs must be strictly increasing")
    values = []
    for c in cutoffs:
        space = build_space(gen.dim, c)
        H = hamiltonian_HI(space, gen)
        values.append(float(np.linalg.eigvalsh(H.matrix)[0]))
    monotone = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    return ConvergenceSeries(
        cutoffs=cutoffs,
        values=values,
        extrapolated=aitken(values),
        monotone=monotone,
    )


def propagator(space: FockSpace, H: FockOperator, t: float) -> FockOperator:
    """Dense spectral-calculus propagator ``e^{i t H}`` for Hermitian ``H``."""
    resid = H.hermiticity_residual()
    scale = max(1.0, float(np.linalg.norm(H.matrix)))
    if resid > 1e-10 * scale:
        raise InputError(f"H is not Hermitian (residual {resid:.3e})")
    hm = 0.5 * (H.matrix + H.matrix.conj().T)
    w, u = np.linalg.eigh(hm)
    m = (u * np.exp(1j * t * w)) @ u.conj().T
    grading = frozenset(range(-space.cutoff, space.cutoff + 1, 2)) if H.grading != {0} else frozenset({0})
    return FockOperator(space, m, grading)


def finite_diff_generator(space: FockSpace, gen: Generator, dt: float) -> FockOperator:
    """Central difference ``(U_I(dt) - U_I(-dt)) / (2 i dt)``.

    Approximates the truncated Hamiltonian on the reliable sector with
    error O(dt^2).
    """
    if not (1e-6 <= dt <= 1e-2):
        raise InputError(f"dt must lie in [1e-6, 1e-2], got {dt}")
    plus = u_type1(space, gen, dt).operator
    minus = u_type1(space, gen, -dt).operator
    m = (plus.matrix - minus.matrix) / (2j * dt)
    return FockOperator(space, m, plus.grading | minus.grading)
