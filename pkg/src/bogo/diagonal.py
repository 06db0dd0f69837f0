"""Diagonal infinite-mode models: single-mode closed forms, the four-way
classification, and the renormalization constants.

A diagonal model is given by real sequences ``h_n`` and complex ``v_n``
(expressions in ``n`` plus finite overrides).  The four verdicts are
decided by the sharp series criteria:

* strongly continuous group  <=>  ``|v_n| <= a |h_n| + b`` with ``a < 1``,
* unitarily implementable    <=>  ``sum |v_n|^2 / (1 + h_n^2) < inf``,
* type I                     <=>  ``sum |v_n|^2 / (1 + |h_n|) < inf``,
* type II                    <=>  ``h_n >= |v_n|`` for all n and
                                  ``sum_{0 < |h_n| <= 1} |v_n|^2 / |h_n| < inf``.

Series are decided in three tiers: symbolic summand asymptotics, log-log
regression on samples, and an honest ``undecided``.  Verdicts are
clamped to the monotone structure (type I or II yes implies
implementable yes implies strongly continuous yes).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, PreconditionError
from . import seqspec
from .seqspec import AsymptoticClass, BinOp, Func, Num, SeqExpr, Var, evaluate, parse

__all__ = [
    "DiagonalModel",
    "Classification",
    "SeriesVerdict",
    "single_mode_PQ",
    "classify",
    "renorm_phase_rate",
    "type2_constant",
    "combined_phase_rate",
    "phase_integral",
    "phase_integral_quadrature",
]

#: Partial sums reported as evidence are taken at these cutoffs.
EVIDENCE_CUTOFFS = (10**3, 10**4, 10**5, 10**6)

#: Exponent margin around -1 inside which a regression-based verdict is undecided.
REGRESSION_MARGIN = 0.1
SYMBOLIC_MARGIN = 1e-9


@dataclass(frozen=True)
class SeriesVerdict:
    """Convergence decision for a positive series, with evidence."""

    value: str  # convergent | divergent | undecided
    partial_sums: list[float]
    cutoffs: list[int]
    summand_class: AsymptoticClass


@dataclass(frozen=True)
class Classification:
    """The four verdicts, each yes/no/undecided, with per-criterion evidence."""

    strongly_continuous: str
    implementable: str
    type_I: str
    type_II: str
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DiagonalModel:
    """Sequences ``h_n`` (real) and ``v_n`` (complex) with finite overrides."""

    h: SeqExpr
    v_re: SeqExpr
    v_im: SeqExpr
    overrides: dict[int, tuple[float, complex]] = field(default_factory=dict)

    def __post_init__(self):
        for e in (self.h, self.v_re, self.v_im):
            seqspec.validate(e)
        for n, (hn, vn) in self.overrides.items():
            if n < 0:
                raise InputError(f"override index must be nonnegative, got {n}")
            if not np.isfinite(hn) or not np.isfinite(complex(vn)):
                raise InputError(f"override at n = {n} is not finite")

    @staticmethod
    def from_strings(h: str, v_re: str = "0", v_im: str = "0", overrides=None) -> "DiagonalModel":
        return DiagonalModel(parse(h), parse(v_re), parse(v_im), dict(overrides or {}))

    def h_values(self, ns: np.ndarray) -> np.ndarray:
        vals = np.asarray(evaluate(self.h, ns), dtype=float)
        return self._override(ns, vals, 0)

    def v_values(self, ns: np.ndarray) -> np.ndarray:
        vals = np.asarray(evaluate(self.v_re, ns), dtype=float) + 1j * np.asarray(
            evaluate(self.v_im, ns), dtype=float
        )
        return self._override(ns, vals, 1)

    def _override(self, ns, vals, slot):
        if self.overrides:
            for n, pair in self.overrides.items():
                hit = ns == n
                if hit.any():
                    vals = np.where(hit, pair[slot], vals)
        return vals


# ---------------------------------------------------------------------------
# single-mode closed forms


def _cs_kernels(u):
    """C(u) = cos(sqrt(u)) and S(u) = sin(sqrt(u))/sqrt(u), continued to u < 0
    (cosh / sinh branch) with a 6-term series near u = 0."""
    u = np.asarray(u, dtype=float)
    C = np.empty_like(u)
    S = np.empty_like(u)
    small = np.abs(u) < 1e-8
    pos = u >= 1e-8
    neg = u <= -1e-8

    x = np.sqrt(u[pos])
    C[pos] = np.cos(x)
    S[pos] = np.sin(x) / x
    y = np.sqrt(-u[neg])
    C[neg] = np.cosh(y)
    S[neg] = np.sinh(y) / y

    us = u[small]
    cs = np.zeros_like(us)
    ss = np.zeros_like(us)
    term_c = np.ones_like(us)
    term_s = np.ones_like(us)
    for k in range(6):
        cs = cs + term_c
        ss = ss + term_s
        term_c = term_c * (-us) / ((2 * k + 1) * (2 * k + 2))
        term_s = term_s * (-us) / ((2 * k + 2) * (2 * k + 3))
    C[small] = cs
    S[small] = ss
    return C, S


def single_mode_PQ(h, v, t):
    """Blocks ``(P, Q)`` of the single-mode group element at time ``t``.

    One analytic kernel covers the three regimes ``|h| < |v|`` (cosh),
    ``|h| = |v|`` (linear) and ``|h| > |v|`` (cos): with
    ``u = (h^2 - |v|^2) t^2``,

        P = C(u) + i h t S(u),   Q = i conj(v) t S(u),

    so the map is continuous across the boundary and satisfies
    ``|P|^2 - |Q|^2 = 1`` identically.  Accepts scalars or broadcastable
    arrays.
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(v, dtype=complex)
    t = np.asarray(t, dtype=float)
    u = (h * h - np.abs(v) ** 2) * t * t
    C, S = _cs_kernels(u)
    P = C + 1j * h * t * S
    Q = 1j * np.conj(v) * t * S
    return P, Q


# ---------------------------------------------------------------------------
# series machinery

_RANKS = {"no": 0, "undecided": 1, "yes": 2}
_NAMES = {0: "no", 1: "undecided", 2: "yes"}


def _meet(*verdicts: str) -> str:
    return _NAMES[min(_RANKS[v] for v in verdicts)]


def _decide_from_class(cls: AsymptoticClass) -> str:
    symbolic = cls.scale is not None
    margin = SYMBOLIC_MARGIN if symbolic else REGRESSION_MARGIN
    if cls.kind == "exponential":
        if cls.exponent < -margin:
            return "convergent"
        if cls.exponent > margin:
            return "divergent"
        return "undecided"
    if cls.kind in ("power", "log-corrected-power"):
        p = cls.exponent
        if p < -1 - margin:
            return "convergent"
        if p > -1 + margin:
            return "divergent"
        # the p == -1 boundary: pure powers diverge; log corrections decide
        b = cls.log_power
        if cls.kind == "power":
            return "divergent" if symbolic else "undecided"
        log_margin = SYMBOLIC_MARGIN if symbolic else 0.3
        if b < -1 - log_margin:
            return "convergent"
        if b > -1 + log_margin:
            return "divergent"
        return "undecided"
    if cls.kind == "bounded":
        if cls.scale == 0.0:
            return "convergent"
        if cls.scale is not None and abs(cls.scale) > 0:
            return "divergent"
        return "undecided"
    return "undecided"


def _decide_from_partial_sums(sums, cutoffs) -> str:
    """Tier-2 numeric verdict from log-spaced partial sums.

    Clear geometric decay of the per-decade increments is convergence
    evidence; steady or growing increments are divergence evidence.
    Anything in between stays undecided.
    """
    if len(sums) < 3:
        return "undecided"
    scale = max(1.0, max(abs(s) for s in sums))
    diffs = [abs(b - a) for a, b in zip(sums, sums[1:])]
    if all(d <= 1e-12 * scale for d in diffs):
        return "convergent"
    if any(d <= 1e-15 * scale for d in diffs):
        return "undecided"
    ratios = [d2 / d1 for d1, d2 in zip(diffs, diffs[1:])]
    if all(r <= 0.5 for r in ratios):
        return "convergent"
    if all(r >= 0.9 for r in ratios):
        return "divergent"
    return "undecided"


def _partial_sums(values_fn, cutoffs, chunk: int = 1 << 17) -> list[float]:
    cutoffs = [int(c) for c in cutoffs]
    top = max(cutoffs)
    sums = []
    total = 0.0
    done = 0
    targets = iter(sorted(cutoffs))
    target = next(targets)
    out = {}
    while done < top:
        hi = min(done + chunk, top)
        ns = np.arange(done, hi, dtype=np.int64)
        vals = values_fn(ns)
        while target is not None and target <= hi:
            out[target] = total + float(np.sum(vals[: target - done]))
            target = next(targets, None)
        total += float(np.sum(vals))
        done = hi
    return [out[c] for c in sorted(cutoffs)]


def _series(values_fn, summand_cls: AsymptoticClass, cutoffs, forced: str | None = None) -> SeriesVerdict:
    sums = _partial_sums(values_fn, cutoffs)
    value = forced if forced is not None else _decide_from_class(summand_cls)
    if value == "undecided" and forced is None:
        value = _decide_from_partial_sums(sums, sorted(int(c) for c in cutoffs))
    return SeriesVerdict(
        value=value,
        partial_sums=sums,
        cutoffs=sorted(int(c) for c in cutoffs),
        summand_class=summand_cls,
    )


def _vsq_expr(model: DiagonalModel) -> SeqExpr:
    return BinOp("+", BinOp("^", model.v_re, Num(2)), BinOp("^", model.v_im, Num(2)))


def _vabs_expr(model: DiagonalModel) -> SeqExpr:
    return Func("sqrt", _vsq_expr(model))


def _habs_expr(model: DiagonalModel) -> SeqExpr:
    return Func("abs", model.h)


def _numeric_class(values_fn) -> AsymptoticClass:
    ns = seqspec.regression_points()
    with np.errstate(all="ignore"):
        y = values_fn(ns)
    return seqspec.fit_samples(ns, np.asarray(y, dtype=float))


def _masked_series_verdict(model, mask_kind: str, cutoffs) -> SeriesVerdict:
    """Series over the modes with small (``0 < |h| <= 1``) or large (``|h| > 1``)
    ``h_n``, with the corresponding summands of the type-II / renormalization
    criteria."""

    def values(ns):
        h = model.h_values(ns)
        v2 = np.abs(model.v_values(ns)) ** 2
        ah = np.abs(h)
        with np.errstate(divide="ignore", invalid="ignore"):
            if mask_kind == "small":
                out = np.where((ah > 0) & (ah <= 1.0), v2 / np.where(ah > 0, ah, 1.0), 0.0)
            else:
                out = np.where(ah > 1.0, v2 / (4.0 * h), 0.0)
        return out

    habs_cls = seqspec.classify_asymptotics(_habs_expr(model))
    vsq = _vsq_expr(model)
    habs = _habs_expr(model)
    if mask_kind == "small":
        tail_expr = BinOp("/", vsq, habs)
    else:
        tail_expr = BinOp("/", vsq, BinOp("*", Num(4), habs))

    # Does the h-mask hold on the tail?  Decide from the growth class of |h|.
    grows = habs_cls.kind == "exponential" and habs_cls.exponent > 0
    grows = grows or (habs_cls.kind in ("power", "log-corrected-power") and habs_cls.exponent > SYMBOLIC_MARGIN)
    shrinks = habs_cls.kind == "exponential" and habs_cls.exponent < 0
    shrinks = shrinks or (habs_cls.kind in ("power", "log-corrected-power") and habs_cls.exponent < -SYMBOLIC_MARGIN)
    bounded_limit = habs_cls.scale if habs_cls.kind == "bounded" else None

    mask_tail_full = None  # True: mask holds cofinally; False: mask empty tail
    if mask_kind == "small":
        if grows:
            mask_tail_full = False
        elif shrinks or (bounded_limit is not None and 0 < bounded_limit < 1 - 1e-12):
            mask_tail_full = True
        elif bounded_limit is not None and bounded_limit > 1 + 1e-12:
            mask_tail_full = False
    else:
        if grows or (bounded_limit is not None and bounded_limit > 1 + 1e-12):
            mask_tail_full = True
        elif shrinks or (bounded_limit is not None and bounded_limit < 1 - 1e-12):
            mask_tail_full = False

    if mask_tail_full is False:
        cls = AsymptoticClass("bounded", exponent=0.0, scale=0.0)
        return _series(values, cls, cutoffs, forced="convergent")
    if mask_tail_full is True:
        cls = seqspec.classify_asymptotics(tail_expr)
        if cls.kind == "unknown":
            cls = _numeric_class(lambda ns: np.abs(values(ns)))
        return _series(values, cls, cutoffs)
    cls = _numeric_class(lambda ns: np.abs(values(ns)))
    return _series(values, cls, cutoffs, forced="undecided" if cls.kind == "unknown" else None)


# ---------------------------------------------------------------------------
# the four-way classification


def _strongly_continuous(model: DiagonalModel) -> tuple[str, dict]:
    vabs_cls = seqspec.classify_asymptotics(_vabs_expr(model))
    ev: dict = {"v_class": vabs_cls.kind, "v_exponent": vabs_cls.exponent}
    vm = SYMBOLIC_MARGIN if vabs_cls.scale is not None else REGRESSION_MARGIN
    v_bounded = (
        (vabs_cls.kind == "power" and vabs_cls.exponent <= vm)
        or (vabs_cls.kind == "log-corrected-power" and vabs_cls.exponent < -vm)
        or vabs_cls.kind == "bounded"
        or (vabs_cls.kind == "exponential" and vabs_cls.exponent < 0)
    )
    if v_bounded:
        return "yes", ev

    # |v| unbounded: need limsup |v|/|h| < 1 on the tail.
    def ratio(ns):
        h = np.abs(model.h_values(ns))
        v = np.abs(model.v_values(ns))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v == 0, 0.0, v / np.where(h > 0, h, np.inf))

    ratio_cls = _numeric_class(ratio)
    ns = seqspec.regression_points()
    tail = ratio(ns)[-16:]
    est = float(np.max(tail))
    ev["ratio_limsup_estimate"] = est
    decays = ratio_cls.kind in ("power", "log-corrected-power") and ratio_cls.exponent < -REGRESSION_MARGIN
    decays = decays or (ratio_cls.kind == "exponential" and ratio_cls.exponent < 0)
    if decays or est < 0.95:
        return "yes", ev
    if est >= 1.0 - 1e-9:
        return "no", ev
    return "undecided", ev


def classify(model: DiagonalModel, cutoffs=EVIDENCE_CUTOFFS) -> Classification:
    """Evaluate the four criteria with series evidence at the given cutoffs."""
    vsq = _vsq_expr(model)
    habs = _habs_expr(model)

    sc, sc_ev = _strongly_continuous(model)

    def impl_values(ns):
        h = model.h_values(ns)
        return np.abs(model.v_values(ns)) ** 2 / (1.0 + h * h)

    impl_expr = BinOp("/", vsq, BinOp("+", Num(1), BinOp("^", model.h, Num(2))))
    impl_cls = seqspec.classify_asymptotics(impl_expr)
    if impl_cls.kind == "unknown":
        impl_cls = _numeric_class(lambda ns: np.abs(impl_values(ns)))
    impl_series = _series(impl_values, impl_cls, cutoffs)
    impl = {"convergent": "yes", "divergent": "no", "undecided": "undecided"}[impl_series.value]

    def t1_values(ns):
        h = model.h_values(ns)
        return np.abs(model.v_values(ns)) ** 2 / (1.0 + np.abs(h))

    t1_expr = BinOp("/", vsq, BinOp("+", Num(1), habs))
    t1_cls = seqspec.classify_asymptotics(t1_expr)
    if t1_cls.kind == "unknown":
        t1_cls = _numeric_class(lambda ns: np.abs(t1_values(ns)))
    t1_series = _series(t1_values, t1_cls, cutoffs)
    type1 = {"convergent": "yes", "divergent": "no", "undecided": "undecided"}[t1_series.value]

    # type II: pointwise h_n >= |v_n|, plus the small-|h| series.
    probes = seqspec._probe_points()
    if model.overrides:
        probes = np.unique(np.concatenate([probes, np.array(sorted(model.overrides), dtype=np.int64)]))
    hp = model.h_values(probes)
    vp = np.abs(model.v_values(probes))
    viol = hp < vp - 1e-12 * np.maximum(1.0, vp)
    violation_at = int(probes[viol][0]) if viol.any() else None
    pointwise = "no" if violation_at is not None else "yes"
    if pointwise == "yes":
        # asymptotic dominance: h - |v| must not go negative beyond the probes
        far = seqspec.regression_points()
        tail = model.h_values(far) - np.abs(model.v_values(far))
        if tail.size and float(np.min(tail)) < -1e-12:
            pointwise = "no"
            violation_at = int(far[np.argmin(tail)])
    t2_series = _masked_series_verdict(model, "small", cutoffs)
    series_verdict = {"convergent": "yes", "divergent": "no", "undecided": "undecided"}[t2_series.value]
    type2 = _meet(pointwise, series_verdict)

    # monotone structure: yes propagates up the chain, no propagates down
    if type1 == "yes" or type2 == "yes":
        impl = "yes"
    if impl == "yes":
        sc = "yes"
    if sc == "no":
        impl = "no"
    if impl == "no":
        type1 = "no"
        type2 = "no"

    def ser_ev(s: SeriesVerdict) -> dict:
        return {
            "verdict": s.value,
            "cutoffs": s.cutoffs,
            "partial_sums": s.partial_sums,
            "summand_class": {
                "kind": s.summand_class.kind,
                "exponent": s.summand_class.exponent,
                "log_power": s.summand_class.log_power,
            },
        }

    evidence = {
        "strongly_continuous": sc_ev,
        "implementable": ser_ev(impl_series),
        "type_I": ser_ev(t1_series),
        "type_II": {
            "pointwise": pointwise,
            "violation_at": violation_at,
            "series": ser_ev(t2_series),
        },
    }
    return Classification(
        strongly_continuous=sc,
        implementable=impl,
        type_I=type1,
        type_II=type2,
        evidence=evidence,
    )


# ---------------------------------------------------------------------------
# constants


def renorm_phase_rate(model: DiagonalModel, cutoffs) -> SeriesVerdict:
    """Partial sums of ``Tr Lambda_ren = sum_{|h_n| > 1} |v_n|^2 / (4 h_n)``.

    The verdict refers to absolute convergence of the masked series; the
    partial sums are signed.  For implementable models this series may
    still diverge (it is one of two separately divergent pieces of the
    renormalized phase); see :func:`combined_phase_rate` for the combined
    per-mode summand.
    """
    return _masked_series_verdict(model, "large", cutoffs)


def type2_constant(model: DiagonalModel, cutoffs) -> SeriesVerdict:
    """Partial sums of the total downward shift
    ``sum_n (h_n - sqrt(h_n^2 - |v_n|^2)) / 2`` of the type-I Hamiltonian.

    Requires the model to be of type II (precondition error when the
    classification says "no").
    """
    cls = classify(model)
    if cls.type_II == "no":
        raise PreconditionError("type-II constant requested for a model that is not of type II")

    def values(ns):
        h = model.h_values(ns)
        v2 = np.abs(model.v_values(ns)) ** 2
        disc = np.maximum(h * h - v2, 0.0)
        root = np.sqrt(disc)
        # stable for h >> |v|: h - sqrt(h^2 - v^2) = v^2 / (h + sqrt(...))
        safe = h + root
        return 0.5 * np.where(safe > 0, v2 / safe, h - root)

    shift_expr = BinOp(
        "*",
        Num(0.5),
        BinOp("-", model.h, Func("sqrt", BinOp("-", BinOp("^", model.h, Num(2)), _vsq_expr(model)))),
    )
    scls = seqspec.classify_asymptotics(shift_expr)
    if scls.kind == "unknown":
        scls = _numeric_class(lambda ns: np.abs(values(ns)))
    return _series(values, scls, cutoffs)


def _phase_integral_closed(h, v2, t):
    """``Re integral_0^t Q(s) v conj(P(s))^-1 ds`` for modes with h^2 > |v|^2.

    Closed form: minus ``t h (1 - sqrt(1 - q))`` (with ``q = v^2/h^2``)
    minus the bounded periodic remainder built from the arccot term.
    """
    h = np.asarray(h, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    t = float(t)
    hsq = h * h
    omega = np.sqrt(hsq - v2)
    root = np.sqrt(np.maximum(1.0 - v2 / np.where(hsq > 0, hsq, 1.0), 0.0))
    # t h (1 - sqrt(1-q)) evaluated stably as t v^2 / (h (1 + sqrt(1-q)))
    main = np.where(h != 0, t * v2 / (h * (1.0 + root)), 0.0)
    x = t * omega
    r = np.where(omega > 0, x - np.pi * np.floor(x / np.pi), 0.0)
    cot = np.where(np.sin(r) != 0, np.cos(r) / np.where(np.sin(r) != 0, np.sin(r), 1.0), np.inf)
    arccot = 0.5 * np.pi - np.arctan(root * cot)
    rem = np.sign(h) * np.where(r > 0, r - arccot, 0.0)
    return -(main + rem)


def _phase_integral_soft(h, v2, t):
    """Same integral for modes with ``h^2 <= |v|^2`` (no oscillation):

        -h t + arctan(h tanh(t nu) / nu),   nu = sqrt(|v|^2 - h^2),

    with ``tanh(t nu)/nu`` continued through ``nu = 0`` by its series.
    """
    h = np.asarray(h, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    t = float(t)
    nu2 = v2 - h * h
    nu = np.sqrt(np.maximum(nu2, 0.0))
    x = t * nu
    small = x < 1e-6
    w = np.where(small, t * (1.0 - x * x / 3.0), np.tanh(x) / np.where(nu > 0, nu, 1.0))
    return -h * t + np.arctan(h * w)


def phase_integral_quadrature(h, v, t, nodes: int = 512):
    """Composite-Simpson evaluation of ``Re integral_0^t Q v conj(P)^-1 ds``.

    Independent oracle for the closed forms; vectorized over modes.
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(v, dtype=complex)
    s = np.linspace(0.0, t, nodes + 1)
    w = np.ones(nodes + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (t / nodes) / 3.0
    acc = np.zeros(np.broadcast(h, v).shape, dtype=float)
    for si, wi in zip(s, w):
        P, Q = single_mode_PQ(h, v, si)
        acc += wi * (Q * v / np.conj(P)).real
    return acc


def phase_integral(h, v, t):
    """``Re integral_0^t Q v conj(P)^-1 ds`` per mode, by regime-split closed forms."""
    h = np.asarray(h, dtype=float)
    v2 = np.abs(np.asarray(v, dtype=complex)) ** 2
    out = np.empty(np.broadcast(h, v2).shape, dtype=float)
    h, v2 = np.broadcast_to(h, out.shape), np.broadcast_to(v2, out.shape)
    osc = h * h > v2 * (1.0 + 1e-12) + 1e-300
    out[osc] = _phase_integral_closed(h[osc], v2[osc], t)
    out[~osc] = _phase_integral_soft(h[~osc], v2[~osc], t)
    return out


def combined_phase_rate(model: DiagonalModel, t: float, cutoffs) -> SeriesVerdict:
    """Partial sums of the combined renormalized phase rate per mode,

        phi_n(t) = (1/2) Re integral_0^t Q_n v_n conj(P_n)^-1 ds
                   + [|h_n| > 1] * t |v_n|^2 / (4 h_n).

    The two pieces may each diverge over modes; their combination is
    summable for implementable models.
    """

    def values(ns):
        h = model.h_values(ns)
        v = model.v_values(ns)
        v2 = np.abs(v) ** 2
        out = 0.5 * phase_integral(h, v, t)
        lam = np.where(np.abs(h) > 1.0, t * v2 / (4.0 * np.where(h != 0, h, 1.0)), 0.0)
        return out + lam

    cls = _numeric_class(lambda ns: np.abs(values(ns)))
    return _series(values, cls, cutoffs)
