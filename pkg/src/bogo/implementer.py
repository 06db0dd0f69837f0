"""Implementing unitaries: U_nat and the type-I dynamics on truncated spaces.

The natural implementer of a symplectic map with blocks ``(P, Q)`` is

    U_nat = det(1 - K*K)^(1/4) e^{-a*(K)/2} Gamma((P^-1)*) e^{-a(L)/2},

with ``K = conj(Q P^-1)`` and ``L = -P^-1 conj(Q)``.  The type-I group
replaces the determinant prefactor by ``det(conj(P(t)) e^{i t conj(h)})^(-1/2)``,
evaluated on its continuous branch through the integrated trace

    det(conj(P(t)) e^{i t conj(h)}) = exp(-i * integral_0^t Tr(Q(s) v conj(P(s))^-1) ds),

so no pointwise square-root branch choice is ever made.

Because the lowering factor acts first, every matrix element of the
product over the truncated basis is exact; only norm-level statements
(unitarity, intertwining, group law) need projection onto a sector with
margin below the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .fock import FockOperator, FockSpace, gamma, quad_pair, weyl
from .quadrature import adaptive_simpson
from .symplectic import Generator, SymplecticMap, evolve, kl_operators

__all__ = [
    "ImplementerResult",
    "exp_quad",
    "u_nat",
    "type1_phase",
    "u_type1",
    "intertwine_residual",
    "exp_det_overlap",
]


@dataclass(frozen=True)
class ImplementerResult:
    """A constructed implementer with its scalar bookkeeping.

    ``vacuum_overlap`` is the matrix element over the vacuum; for U_nat it
    is real positive and equals ``det(1 - K*K)^(1/4)``.  ``phase`` is the
    natural cocycle relating the operator to U_nat (1 for U_nat itself;
    unit modulus for the type-I group).  ``reliable_sector`` is the
    half-cutoff sector on which unitarity-style residuals are quoted.
    """

    operator: FockOperator
    vacuum_overlap: complex
    phase: complex
    reliable_sector: int


def exp_quad(space: FockSpace, m, kind: str) -> FockOperator:
    """Exponential ``e^{-a*(m)/2}`` (``kind="raise"``) or ``e^{-a(m)/2}`` (``kind="lower"``).

    The power series terminates after ``Nmax // 2 + 1`` terms on the
    truncated space.  For the raising kind the operator norm of ``m`` must
    be < 1 (the convergence condition of the untruncated series).
    """
    if kind not in ("raise", "lower"):
        raise InputError(f"kind must be 'raise' or 'lower', got {kind!r}")
    m = np.asarray(m, dtype=complex)
    if kind == "raise":
        opnorm = np.linalg.norm(m, 2) if m.size else 0.0
        if opnorm >= 1.0:
            raise DomainError(f"raising exponential requires operator norm < 1, got {opnorm:.6f}")
    a_m, adag_m = quad_pair(space, m)
    A = adag_m.matrix if kind == "raise" else a_m.matrix
    out = np.eye(space.size, dtype=complex)
    term = np.eye(space.size, dtype=complex)
    for k in range(1, space.cutoff // 2 + 1):
        term = term @ A * (-0.5 / k)
        out += term
        if not np.any(term):
            break
    step = +2 if kind == "raise" else -2
    grading = frozenset(range(0, step * (space.cutoff // 2) + step, step)) or frozenset({0})
    return FockOperator(space, out, grading)


def _det_quarter(K: np.ndarray) -> float:
    """``det(1 - K*K)^(1/4)`` for ``||K|| < 1`` (real positive)."""
    val = np.linalg.det(np.eye(K.shape[0]) - K.conj().T @ K).real
    return float(val) ** 0.25


def u_nat(space: FockSpace, S: SymplecticMap) -> ImplementerResult:
    """Natural implementer of a symplectic map as a truncated operator."""
    if S.dim != space.modes:
        raise InputError(f"map dimension {S.dim} does not match {space.modes} modes")
    K, L = kl_operators(S)
    c = _det_quarter(K)
    e_raise = exp_quad(space, K, "raise")
    g = gamma(space, np.linalg.inv(S.P).conj().T)
    e_lower = exp_quad(space, L, "lower")
    matrix = c * (e_raise.matrix @ g.matrix @ e_lower.matrix)
    grading = (e_raise @ g @ e_lower).grading
    op = FockOperator(space, matrix, grading)
    return ImplementerResult(
        operator=op,
        vacuum_overlap=complex(matrix[0, 0]),
        phase=1.0 + 0.0j,
        reliable_sector=space.cutoff // 2,
    )


def type1_phase(gen: Generator, t: float, quad_tol: float = 1e-10) -> complex:
    """Continuous-branch value of ``det(conj(P(t)) e^{i t conj(h)})^(-1/2)``.

    Computed as ``exp((i/2) * integral_0^t Tr(Q(s) v conj(P(s))^-1) ds)``
    by adaptive Simpson quadrature.  The modulus is not 1 in general; the
    unit-modulus cocycle is ``exp((i/2) Re Tr(...))``.
    """

    def integrand(s: float) -> complex:
        S = evolve(gen, s)
        X = np.linalg.solve(S.P.conj(), np.eye(gen.dim))
        return complex(np.trace(S.Q @ gen.v @ X))

    integral = adaptive_simpson(integrand, 0.0, t, quad_tol)
    return complex(np.exp(0.5j * integral))


def u_type1(space: FockSpace, gen: Generator, t: float, quad_tol: float = 1e-10) -> ImplementerResult:
    """Type-I dynamics ``U_I(t)`` as a truncated operator.

    The scalar prefactor is the continuous-branch determinant factor from
    :func:`type1_phase`; the recorded ``phase`` is the natural cocycle
    ``c_I(t) = det-factor * det(1 - K*K)^(-1/4)`` (unit modulus).
    """
    if gen.dim != space.modes:
        raise InputError(f"generator dimension {gen.dim} does not match {space.modes} modes")
    S = evolve(gen, t)
    K, L = kl_operators(S)
    det_factor = type1_phase(gen, t, quad_tol)
    e_raise = exp_quad(space, K, "raise")
    g = gamma(space, np.linalg.inv(S.P).conj().T)
    e_lower = exp_quad(space, L, "lower")
    matrix = det_factor * (e_raise.matrix @ g.matrix @ e_lower.matrix)
    grading = (e_raise @ g @ e_lower).grading
    op = FockOperator(space, matrix, grading)
    cocycle = det_factor / _det_quarter(K)
    return ImplementerResult(
        operator=op,
        vacuum_overlap=complex(matrix[0, 0]),
        phase=complex(cocycle),
        reliable_sector=space.cutoff // 2,
    )


def intertwine_residual(space: FockSpace, U: FockOperator, S: SymplecticMap, f, sector: int) -> float:
    """Residual of ``U W(f) U* = W(P f + conj(Q) conj(f))`` on a sector.

    Returns the spectral norm of ``(U W(f) U* - W(Rf)) Pi_sector`` where
    ``Pi_sector`` projects onto total number <= ``sector``.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (space.modes,):
        raise InputError(f"f must have shape ({space.modes},), got {f.shape}")
    g = S.P @ f + S.Q.conj() @ f.conj()
    wf = weyl(space, f)
    wg = weyl(space, g)
    diff = U.matrix @ wf.matrix @ U.matrix.conj().T - wg.matrix
    mask = space.sector_mask(sector)
    return float(np.linalg.norm(diff[:, mask], 2))


def exp_det_overlap(space: FockSpace, K, L) -> tuple[complex, complex]:
    """Both sides of the overlap identity
    ``<e^{-a*(L)/2} vac | e^{-a*(K)/2} vac> = det(1 - L*K)^(-1/2)``.

    The left side is the truncated inner product, the right side the
    principal-branch determinant power.
    """
    K = np.asarray(K, dtype=complex)
    L = np.asarray(L, dtype=complex)
    for name, m in (("K", K), ("L", L)):
        if np.linalg.norm(m, 2) >= 1.0:
            raise DomainError(f"{name} must have operator norm < 1")

    def series_vacuum(m):
        _, adag = quad_pair(space, m)
        vec = np.zeros(space.size, dtype=complex)
        vec[0] = 1.0
        term = vec.copy()
        for k in range(1, space.cutoff // 2 + 1):
            term = adag.matrix @ term * (-0.5 / k)
            vec = vec + term
            if not np.any(term):
                break
        return vec

    lhs = complex(np.vdot(series_vacuum(L), series_vacuum(K)))
    rhs = complex(np.linalg.det(np.eye(space.modes) - L.conj().T @ K) ** (-0.5))
    return lhs, rhs
