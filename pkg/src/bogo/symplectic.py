"""Quadratic-Hamiltonian generator data and symplectic one-parameter groups.

A generator is a pair ``(h, v)`` of d x d complex matrices with ``h``
Hermitian and ``v`` complex symmetric.  It defines the block matrix

    A = i [[h, -v], [conj(v), -conj(h)]]

whose exponentials ``R(t) = expm(t A)`` form a one-parameter group of
symplectic maps ``R = [[P, conj(Q)], [Q, conj(P)]]``.  Conjugation is
fixed to entrywise complex conjugation in the canonical basis, so the
abstract relation ``v* = conj(v)`` reads ``v.T == v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import AccuracyError, DegeneracyError, InputError
from .quadrature import adaptive_simpson

__all__ = [
    "Generator",
    "SymplecticMap",
    "ValidationReport",
    "validate_generator",
    "evolve",
    "check_symplectic",
    "kl_operators",
    "time_averaged_v",
    "classical_symbol_min",
    "random_generator",
]

#: Relative tolerance for the structural invariants of a Generator.
STRUCT_TOL = 1e-12

#: Condition-number threshold above which P is treated as degenerate.
COND_LIMIT = 1e12


def _as_square(m, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a structural validation: residual norms plus verdict."""

    ok: bool
    residuals: dict[str, float]
    messages: list[str] = field(default_factory=list)


def validate_generator(h, v, tol: float = STRUCT_TOL) -> ValidationReport:
    """Check the generator invariants: ``h`` Hermitian, ``v`` symmetric.

    Residuals are relative Frobenius norms (absolute when the matrix is
    zero).  ``ok`` holds iff both residuals are within ``tol``.
    """
    h = _as_square(h, "h")
    v = _as_square(v, "v")
    if h.shape != v.shape:
        raise InputError(f"h and v must have equal shapes, got {h.shape} and {v.shape}")

    def rel(delta, ref):
        scale = np.linalg.norm(ref)
        return float(np.linalg.norm(delta) / scale) if scale > 0 else float(np.linalg.norm(delta))

    res = {
        "h_hermitian": rel(h - h.conj().T, h),
        "v_symmetric": rel(v - v.T, v),
    }
    messages = []
    if res["h_hermitian"] > tol:
        messages.append(f"h is not Hermitian (relative residual {res['h_hermitian']:.3e})")
    if res["v_symmetric"] > tol:
        messages.append(f"v is not complex symmetric (relative residual {res['v_symmetric']:.3e})")
    return ValidationReport(ok=not messages, residuals=res, messages=messages)


@dataclass(frozen=True)
class Generator:
    """Validated generator data ``(h, v)`` in dimensionless energy units."""

    h: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        report = validate_generator(self.h, self.v)
        if not report.ok:
            raise InputError("; ".join(report.messages))
        h = _as_square(self.h, "h")
        v = _as_square(self.v, "v")
        h.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    def block_matrix(self) -> np.ndarray:
        """The 2d x 2d group generator ``i [[h, -v], [conj(v), -conj(h)]]``."""
        h, v = self.h, self.v
        return 1j * np.block([[h, -v], [v.conj(), -h.conj()]])


@dataclass(frozen=True)
class SymplecticMap:
    """Blocks ``(P, Q)`` of a symplectic map, tagged with its group time."""

    P: np.ndarray
    Q: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        P = _as_square(self.P, "P")
        Q = _as_square(self.Q, "Q")
        if P.shape != Q.shape:
            raise InputError(f"P and Q must have equal shapes, got {P.shape} and {Q.shape}")
        P.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    def full_matrix(self) -> np.ndarray:
        """Assemble ``R = [[P, conj(Q)], [Q, conj(P)]]``."""
        return np.block([[self.P, self.Q.conj()], [self.Q, self.P.conj()]])

    @staticmethod
    def identity(dim: int) -> "SymplecticMap":
        return SymplecticMap(np.eye(dim, dtype=complex), np.zeros((dim, dim), dtype=complex))


def expm_i_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(i t h)`` for Hermitian ``h`` via eigendecomposition."""
    w, u = np.linalg.eigh(h)
    return (u * np.exp(1j * t * w)) @ u.conj().T


def evolve(gen: Generator, t: float) -> SymplecticMap:
    """Evaluate the symplectic group element ``R(t) = expm(t A)``.

    For ``v == 0`` the group is block diagonal and the blocks are unitary
    exponentials of the Hermitian ``h``, computed by eigendecomposition;
    otherwise the dense 2d x 2d exponential uses scaling-and-squaring.
    """
    d = gen.dim
    if not np.any(gen.v):
        P = expm_i_hermitian(gen.h, t)
        Q = np.zeros((d, d), dtype=complex)
        return SymplecticMap(P, Q, time=t)
    R = scipy.linalg.expm(t * gen.block_matrix())
    return SymplecticMap(R[:d, :d], R[d:, :d], time=t)


def check_symplectic(S: SymplecticMap, tol: float = 1e-8) -> float:
    """Residual ``max(||R J R* - J||_F, ||R* J R - J||_F)``.

    The caller compares the returned residual against ``tol``; the
    parameter only documents the intended acceptance threshold.
    """
    del tol
    d = S.dim
    R = S.full_matrix()
    J = np.diag(np.concatenate([1j * np.ones(d), -1j * np.ones(d)]))
    r1 = np.linalg.norm(R @ J @ R.conj().T - J)
    r2 = np.linalg.norm(R.conj().T @ J @ R - J)
    return float(max(r1, r2))


def kl_operators(S: SymplecticMap) -> tuple[np.ndarray, np.ndarray]:
    """The operators ``K = conj(Q P^-1)`` and ``L = -P^-1 conj(Q)``.

    Both are complex symmetric for a symplectic map, and ``||K|| < 1``.
    Raises :class:`DegeneracyError` when P is too ill conditioned for a
    trustworthy solve.
    """
    sv = np.linalg.svd(S.P, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > COND_LIMIT:
        raise DegeneracyError(
            f"P is numerically degenerate (condition number {sv[0] / max(sv[-1], 1e-300):.3e})"
        )
    lu, piv = scipy.linalg.lu_factor(S.P)
    # K = conj(Q P^-1): solve (P^T) X^T = Q^T for X = Q P^-1.
    QPinv = scipy.linalg.lu_solve((lu, piv), S.Q.T, trans=1).T
    K = QPinv.conj()
    L = -scipy.linalg.lu_solve((lu, piv), S.Q.conj())
    return K, L


def time_averaged_v(gen: Generator, t: float, quad_tol: float | None = None) -> np.ndarray:
    """The averaged coupling ``v(t) = integral_0^t e^{i s h} v e^{i s conj(h)} ds``.

    Evaluated in the eigenbasis of ``h``: with ``h = U diag(lam) U*`` and
    ``vt = U* v conj(U)``, the entries integrate to
    ``vt_jk (e^{i t (lam_j + lam_k)} - 1) / (i (lam_j + lam_k))``,
    with the removable singularity at ``lam_j + lam_k == 0`` filled by the
    series value ``t``.  When ``quad_tol`` is given the result is verified
    entrywise against adaptive Simpson quadrature at that tolerance.
    """
    lam, u = np.linalg.eigh(gen.h)
    vt = u.conj().T @ gen.v @ u.conj()
    s = lam[:, None] + lam[None, :]
    small = np.abs(s) * abs(t) < 1e-8
    safe = np.where(small, 1.0, s)
    kernel = (np.exp(1j * t * s) - 1.0) / (1j * safe)
    # Second-order series of (e^{i t s} - 1)/(i s) around s = 0.
    kernel = np.where(small, t + 0.5j * s * t * t, kernel)
    result = u @ (vt * kernel) @ u.T

    if quad_tol is not None:
        d = gen.dim
        def entry(a):
            e = expm_i_hermitian(gen.h, a)
            return e @ gen.v @ e.T

        ref = np.empty((d, d), dtype=complex)
        for j in range(d):
            for k in range(d):
                ref[j, k] = adaptive_simpson(lambda a: entry(a)[j, k], 0.0, t, quad_tol)
        dev = np.max(np.abs(result - ref))
        if dev > 10 * max(quad_tol, 1e-14) * max(1.0, abs(t)):
            raise AccuracyError(
                f"closed-form averaged coupling deviates from quadrature by {dev:.3e}"
            )
    return result


def classical_symbol_min(gen: Generator) -> float:
    """Minimum eigenvalue of the Hermitian symbol matrix ``[[h, v], [conj(v), conj(h)]]``.

    The quadratic symbol of the group is positive iff this value is
    nonnegative (up to tolerance): the symbol at ``(f, conj(f))`` equals
    half the quadratic form of this matrix, and the matrix commutes with
    the swap-and-conjugate involution, so positivity on the real subspace
    is equivalent to positive semidefiniteness.
    """
    h, v = gen.h, gen.v
    m = np.block([[h, v], [v.conj(), h.conj()]])
    return float(np.linalg.eigvalsh(m)[0])


def random_generator(rng: np.random.Generator, dim: int, norm_cap: float | None = None) -> Generator:
    """Draw a random valid generator; optionally rescale so ``||A|| <= norm_cap``."""
    g1 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    g2 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (g1 + g1.conj().T)
    v = 0.5 * (g2 + g2.T)
    gen = Generator(h, v)
    if norm_cap is not None:
        norm = np.linalg.norm(gen.block_matrix(), 2)
        if norm > norm_cap:
            scale = norm_cap / norm
            gen = Generator(h * scale, v * scale)
    return gen
