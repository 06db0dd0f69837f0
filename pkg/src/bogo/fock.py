"""Truncated multimode Fock space and dense second-quantized operators.

The basis is the set of occupation tuples ``(n_1, ..., n_d)`` with
``sum(n) <= Nmax``, ordered by total particle number and then
lexicographically; index 0 is the vacuum.  Operators are dense complex
matrices over this basis, each tagged with its particle-number grading
(the set of total-number changes with nonzero blocks).  A product of
operators with total raising degree ``2k`` is exact on the "reliable
sector" ``sum(n) <= Nmax - 2k``; norm-level assertions must always be
projected onto an explicit sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import CapacityError, InputError
from .symplectic import Generator

__all__ = [
    "FockSpace",
    "FockOperator",
    "FockVector",
    "build_space",
    "ladder",
    "second_quantize",
    "number_operator",
    "quad_pair",
    "weyl",
    "gamma",
    "hamiltonian_HI",
]

#: Largest admissible basis size for dense matrices.
CAPACITY = 200_000


class FockSpace:
    """Occupation-number basis of a truncated bosonic Fock space."""

    def __init__(self, modes: int, cutoff: int):
        if modes < 1:
            raise InputError(f"modes must be positive, got {modes}")
        if cutoff < 0:
            raise InputError(f"cutoff must be nonnegative, got {cutoff}")
        size = comb(cutoff + modes, modes)
        if size > CAPACITY:
            raise CapacityError(
                f"basis size C({cutoff + modes},{modes}) = {size} exceeds capacity {CAPACITY}"
            )
        if modes * np.log2(cutoff + 1.0) >= 62 and cutoff > 0:
            raise CapacityError("occupation keys would exceed 63 bits")
        self.modes = modes
        self.cutoff = cutoff
        self.basis = _enumerate_basis(modes, cutoff)
        self.totals = self.basis.sum(axis=1)
        self.radix = cutoff + 1
        self.keys = _kernels.encode_keys(self.basis, self.radix)
        order = np.argsort(self.keys)
        self.sorted_keys = self.keys[order]
        self.perm = order.astype(np.int64)
        self._index = {tuple(row): i for i, row in enumerate(self.basis)}
        self.basis.setflags(write=False)

    @property
    def size(self) -> int:
        return self.basis.shape[0]

    def index(self, occupation) -> int:
        """Basis index of an occupation tuple (O(1) hash lookup)."""
        try:
            return self._index[tuple(int(n) for n in occupation)]
        except KeyError:
            raise InputError(f"occupation {tuple(occupation)} not in basis") from None

    def sector_mask(self, sector: int) -> np.ndarray:
        """Boolean mask of basis states with total number <= sector."""
        return self.totals <= sector

    def vacuum(self) -> "FockVector":
        amp = np.zeros(self.size, dtype=complex)
        amp[0] = 1.0
        return FockVector(self, amp)

    def basis_vector(self, occupation) -> "FockVector":
        amp = np.zeros(self.size, dtype=complex)
        amp[self.index(occupation)] = 1.0
        return FockVector(self, amp)

    def __eq__(self, other):
        return (
            isinstance(other, FockSpace)
            and other.modes == self.modes
            and other.cutoff == self.cutoff
        )

    def __hash__(self):
        return hash((self.modes, self.cutoff))

    def __repr__(self):
        return f"FockSpace(modes={self.modes}, cutoff={self.cutoff}, size={self.size})"


def _enumerate_basis(d: int, nmax: int) -> np.ndarray:
    rows = []

    def fill(prefix, remaining, slots):
        if slots == 1:
            rows.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            fill(prefix + [k], remaining - k, slots - 1)

    out = []
    for total in range(nmax + 1):
        rows = []
        fill([], total, d)
        out.extend(sorted(rows))
    return np.array(out, dtype=np.int64)


def build_space(d: int, nmax: int) -> FockSpace:
    """Build the truncated space with ``d`` modes and total number <= ``nmax``."""
    return FockSpace(d, nmax)


def _closure(deltas: set[int], nmax: int) -> frozenset[int]:
    """All reachable total-number changes from sums of ``deltas``."""
    reach = {0}
    frontier = {0}
    while frontier:
        nxt = set()
        for r in frontier:
            for g in deltas:
                s = r + g
                if -nmax <= s <= nmax and s not in reach:
                    nxt.add(s)
        reach |= nxt
        frontier = nxt
    return frozenset(reach)


@dataclass(frozen=True)
class FockOperator:
    """Dense operator over a Fock basis with particle-number grading."""

    space: FockSpace
    matrix: np.ndarray
    grading: frozenset[int] = frozenset({0})

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.size, self.space.size):
            raise InputError(f"matrix shape {m.shape} does not match basis size {self.space.size}")
        object.__setattr__(self, "matrix", m)

    def adjoint(self) -> "FockOperator":
        return FockOperator(self.space, self.matrix.conj().T, frozenset(-g for g in self.grading))

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        if other.space != self.space:
            raise InputError("operators act on different spaces")
        grading = frozenset(
            g1 + g2
            for g1 in self.grading
            for g2 in other.grading
            if -self.space.cutoff <= g1 + g2 <= self.space.cutoff
        )
        return FockOperator(self.space, self.matrix @ other.matrix, grading or frozenset({0}))

    def __add__(self, other: "FockOperator") -> "FockOperator":
        if other.space != self.space:
            raise InputError("operators act on different spaces")
        return FockOperator(self.space, self.matrix + other.matrix, self.grading | other.grading)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        if other.space != self.space:
            raise InputError("operators act on different spaces")
        return FockOperator(self.space, self.matrix - other.matrix, self.grading | other.grading)

    def __mul__(self, scalar) -> "FockOperator":
        return FockOperator(self.space, self.matrix * scalar, self.grading)

    __rmul__ = __mul__

    def apply(self, vec: "FockVector") -> "FockVector":
        if vec.space != self.space:
            raise InputError("vector lives on a different space")
        return FockVector(self.space, self.matrix @ vec.amplitudes)

    def hermiticity_residual(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T))

    def grading_residual(self) -> float:
        """Largest entry connecting sectors outside the declared grading."""
        t = self.space.totals
        delta = t[:, None] - t[None, :]
        allowed = np.isin(delta, list(self.grading))
        off = np.where(allowed, 0.0, np.abs(self.matrix))
        return float(off.max()) if off.size else 0.0


@dataclass(frozen=True)
class FockVector:
    """State vector over a Fock basis."""

    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.space.size,):
            raise InputError(f"amplitude shape {a.shape} does not match basis size {self.space.size}")
        object.__setattr__(self, "amplitudes", a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def max_occupied_total(self) -> int:
        """Highest occupied total number (the vector's reliable-sector tag)."""
        nz = np.abs(self.amplitudes) > 0
        if not nz.any():
            return 0
        return int(self.space.totals[nz].max())


def ladder(space: FockSpace, f) -> tuple[FockOperator, FockOperator]:
    """The pair ``(a(f), a*(f))`` for a one-particle vector ``f``.

    ``a*(f) = sum_j f_j a*_j`` raises mode ``j`` with amplitude
    ``sqrt(n_j + 1)``; ``a(f)`` is its adjoint (antilinear in ``f``).  On
    the sector ``sum(n) <= Nmax - 1`` the commutator ``[a(f), a*(g)]``
    equals ``<f|g> 1`` exactly.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (space.modes,):
        raise InputError(f"f must have shape ({space.modes},), got {f.shape}")
    raise_m = _kernels.ladder_raise(space.basis, space.sorted_keys, space.perm, space.radix, f)
    adag = FockOperator(space, raise_m, frozenset({+1}))
    return adag.adjoint(), adag


def second_quantize(space: FockSpace, h) -> FockOperator:
    """Second quantization ``dGamma(h) = sum_jk h_jk a*_j a_k`` (grading 0)."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (space.modes, space.modes):
        raise InputError(f"h must be {space.modes} x {space.modes}, got {h.shape}")
    m = _kernels.dgamma(space.basis, space.sorted_keys, space.perm, space.radix, h)
    return FockOperator(space, m, frozenset({0}))


def number_operator(space: FockSpace) -> FockOperator:
    """``N = dGamma(1)``."""
    return second_quantize(space, np.eye(space.modes))


def quad_pair(space: FockSpace, v) -> tuple[FockOperator, FockOperator]:
    """Quadratic pair ``(a(v), a*(v))`` for a complex symmetric matrix ``v``.

    ``a*(v) = sum_jk v_jk a*_j a*_k`` (grading +2); ``a(v)`` is its
    adjoint, antilinear in ``v``.  The matrix ``v`` is identified with the
    two-particle vector ``sum_jk v_jk e_j (x) e_k``, whose norm is the
    Frobenius norm of ``v``.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (space.modes, space.modes):
        raise InputError(f"v must be {space.modes} x {space.modes}, got {v.shape}")
    sym = np.linalg.norm(v - v.T)
    if sym > 1e-12 * max(np.linalg.norm(v), 1e-300):
        raise InputError(f"v must be complex symmetric (residual {sym:.3e})")
    m = _kernels.quad_raise(space.basis, space.sorted_keys, space.perm, space.radix, v)
    araise = FockOperator(space, m, frozenset({+2}))
    return araise.adjoint(), araise


def weyl(space: FockSpace, f) -> FockOperator:
    """Weyl operator ``W(f) = exp(i phi(f))`` with ``phi = (a(f) + a*(f)) / sqrt(2)``.

    Unitary on the truncated space up to tail error; keep ``||f||`` small
    relative to the cutoff so the coherent tail is negligible.
    """
    a_op, adag_op = ladder(space, f)
    phi = (a_op.matrix + adag_op.matrix) / np.sqrt(2.0)
    m = scipy.linalg.expm(1j * phi)
    return FockOperator(space, m, _closure({-1, +1}, space.cutoff))


def gamma(space: FockSpace, q) -> FockOperator:
    """Tensor-power lift ``Gamma(q)``: acts as ``q (x) ... (x) q`` per sector."""
    q = np.asarray(q, dtype=complex)
    if q.shape != (space.modes, space.modes):
        raise InputError(f"q must be {space.modes} x {space.modes}, got {q.shape}")
    m = _kernels.gamma_power(space.basis, space.sorted_keys, space.perm, space.radix, q)
    return FockOperator(space, m, frozenset({0}))


def hamiltonian_HI(space: FockSpace, gen: Generator) -> FockOperator:
    """Type-I quadratic Hamiltonian ``dGamma(h) + (a*(v) + a(v)) / 2``.

    Hermitian on the truncated space; exact restriction of the full
    operator on states with ``sum(n) <= Nmax - 2``.
    """
    if gen.dim != space.modes:
        raise InputError(f"generator dimension {gen.dim} does not match {space.modes} modes")
    dg = second_quantize(space, gen.h)
    a_v, adag_v = quad_pair(space, gen.v)
    m = dg.matrix + 0.5 * (a_v.matrix + adag_v.matrix)
    return FockOperator(space, m, frozenset({-2, 0, +2}))
