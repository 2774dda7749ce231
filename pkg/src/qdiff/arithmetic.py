"""Per-prime arithmetic of q-difference systems.

kappa_p is the multiplicative order of q modulo p and ell_p = v_p(1 - q^kappa_p).
The curvature at p is the iterate A_kappa(x) = A(x) A(qx) ... A(q^(kappa-1) x)
reduced modulo p^ell (or modulo p). The radius invariant chi is handled in
log base p: a value c means chi = p^c.
"""
from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from sympy import sieve

from .core import (INF, BadPrime, DomainError, ModMatrix, ModRing, RatFun, RatMatrix,
                   as_fraction, gauss_valuation_matrix, mod_reduce, vp)
from .errors import HypothesisNotMet, NotAUnit
from .qcalc import (is_strong, multiplicative_order, q_int_valuation, q_mod,
                    v_one_minus_q_power)
from .qmodule import FormalSolution, QDiffSystem, delta_cyclic_coefficients, delta_matrices

MOD_P = "mod_p"
MOD_P_ELL = "mod_p_ell"


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    return list(sieve.primerange(2, n + 1))


@dataclass(frozen=True)
class PrimeProfile:
    p: int
    kappa: int | None
    ell: int | None
    strong: bool
    good: bool


def prime_profile(q, p: int) -> PrimeProfile:
    """kappa, ell and admissibility flags; primes dividing q come back not good."""
    q = as_fraction(q)
    if vp(q, p) != 0:
        return PrimeProfile(p, None, None, False, False)
    kappa = multiplicative_order(q, p)
    ell = v_one_minus_q_power(q, kappa, p)
    return PrimeProfile(p, kappa, ell, is_strong(p, ell), True)


def _require_good(q, p: int) -> PrimeProfile:
    prof = prime_profile(q, p)
    if not prof.good:
        raise NotAUnit(q, p)
    return prof


@dataclass(frozen=True)
class CurvatureVerdict:
    p: int
    status: str  # Identity | Unipotent | Other | BadPrime
    modulus_used: str
    order: int | None = None
    kappa: int | None = None
    ell: int | None = None

    def to_json(self) -> dict:
        out = {"p": self.p, "kappa": self.kappa, "ell": self.ell,
               "status": self.status, "modulus": self.modulus_used}
        if self.order is not None:
            out["order"] = self.order
        return out


def _ring_for(prof: PrimeProfile, modulus: str) -> ModRing:
    if modulus == MOD_P:
        return ModRing(prof.p, 1)
    if modulus == MOD_P_ELL:
        return ModRing(prof.p, prof.ell)
    raise DomainError(f"unknown modulus {modulus!r}")


def _curvature(S: QDiffSystem, prof: PrimeProfile, ring: ModRing) -> ModMatrix:
    A = mod_reduce(S.A, ring)
    m = ring.modulus
    qm = q_mod(S.q, m)
    out = A
    shift = 1
    for _ in range(1, prof.kappa):
        shift = shift * qm % m
        out = out @ A.dilate(shift)
    return out


def curvature_matrix(S: QDiffSystem, p: int, modulus: str = MOD_P_ELL) -> ModMatrix:
    """phi_iterate(S, kappa_p) reduced modulo p^ell_p (or p)."""
    prof = _require_good(S.q, p)
    return _curvature(S, prof, _ring_for(prof, modulus))


def curvature_is_identity(S: QDiffSystem, p: int, modulus: str = MOD_P_ELL) -> CurvatureVerdict:
    prof = _require_good(S.q, p)
    M = _curvature(S, prof, _ring_for(prof, modulus))
    status = "Identity" if M.is_identity() else "Other"
    return CurvatureVerdict(p, status, modulus, 1 if status == "Identity" else None,
                            prof.kappa, prof.ell)


def _unipotent_from_matrix(M: ModMatrix, prof: PrimeProfile, modulus: str) -> CurvatureVerdict:
    if M.is_identity():
        return CurvatureVerdict(prof.p, "Identity", modulus, 1, prof.kappa, prof.ell)
    nil = M.minus_scalar(1)
    # over (Z/p^l)[x] localised, a nilpotent rank-mu matrix has index <= mu * l
    bound = M.rows * M.ring.ell
    power = nil
    for n in range(2, bound + 1):
        power = power @ nil
        if power.is_zero():
            return CurvatureVerdict(prof.p, "Unipotent", modulus, n, prof.kappa, prof.ell)
    return CurvatureVerdict(prof.p, "Other", modulus, None, prof.kappa, prof.ell)


def unipotent_order(S: QDiffSystem, p: int, modulus: str = MOD_P_ELL) -> CurvatureVerdict:
    """Identity, Unipotent(n) with n minimal, or Other."""
    prof = _require_good(S.q, p)
    M = _curvature(S, prof, _ring_for(prof, modulus))
    return _unipotent_from_matrix(M, prof, modulus)


def system_hash(S: QDiffSystem) -> str:
    body = f"{S.q}|{S.A.rows}|" + ";".join(str(e) for e in S.A.entries)
    return hashlib.sha256(body.encode()).hexdigest()[:16]


@dataclass
class ScanReport:
    q: Fraction
    pmax: int
    system_hash: str
    verdicts: list[CurvatureVerdict]
    bad_primes: list[dict]
    skipped_weak: list[int] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        counts: dict[str, int] = {}
        for v in self.verdicts:
            counts[v.status] = counts.get(v.status, 0) + 1
        return counts

    def statuses(self, modulus: str = MOD_P_ELL) -> dict[int, CurvatureVerdict]:
        return {v.p: v for v in self.verdicts if v.modulus_used == modulus}

    def all_identity(self, modulus: str = MOD_P_ELL) -> bool:
        rel = [v for v in self.verdicts if v.modulus_used == modulus and v.status != "BadPrime"]
        return bool(rel) and all(v.status == "Identity" for v in rel)

    def to_json(self) -> dict:
        return {"system_hash": self.system_hash, "q": str(self.q), "pmax": self.pmax,
                "verdicts": [v.to_json() for v in self.verdicts],
                "bad_primes": self.bad_primes, "skipped_weak": self.skipped_weak,
                "summary": self.summary}


def _scan_one(S: QDiffSystem, p: int, moduli: tuple[str, ...], include_weak: bool):
    prof = prime_profile(S.q, p)
    if not prof.good:
        return [], {"p": p, "reason": "p divides q"}, None
    if not prof.strong and not include_weak:
        return [], None, p
    out = []
    try:
        for modulus in moduli:
            M = _curvature(S, prof, _ring_for(prof, modulus))
            out.append(_unipotent_from_matrix(M, prof, modulus))
    except BadPrime as exc:
        verdicts = [CurvatureVerdict(p, "BadPrime", m, None, prof.kappa, prof.ell) for m in moduli]
        return verdicts, {"p": p, "reason": exc.reason}, None
    return out, None, None


def curvature_scan(S: QDiffSystem, pmax: int, modulus: str = MOD_P_ELL,
                   include_weak: bool = False, jobs: int = 1) -> ScanReport:
    """Curvature verdicts at every good strong prime up to pmax.

    modulus may be "mod_p", "mod_p_ell" or "both".
    """
    if pmax < 2:
        raise DomainError("pmax must be at least 2")
    moduli = (MOD_P, MOD_P_ELL) if modulus == "both" else (modulus,)
    primes = primes_upto(pmax)
    if jobs > 1 and len(primes) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_one, [S] * len(primes), primes,
                                    [moduli] * len(primes), [include_weak] * len(primes)))
    else:
        results = [_scan_one(S, p, moduli, include_weak) for p in primes]
    verdicts, bad, weak = [], [], []
    for vs, b, w in results:
        verdicts.extend(vs)
        if b is not None:
            bad.append(b)
        if w is not None:
            weak.append(w)
    verdicts.sort(key=lambda v: (v.p, v.modulus_used))
    return ScanReport(S.q, pmax, system_hash(S), verdicts, bad, weak)


# ------------------------------------------------------------------ chi


@dataclass(frozen=True)
class ChiBound:
    """A statement about log_p chi.

    truncated: value is the estimate -h(N)/N; sequence holds h(n)/n.
    lower bounds: value c means log_p chi >= c; dwork_frobenius is an equality;
    bad_regime_range: value is the (low, high) interval for log_p chi.
    """

    kind: str
    value: object
    meta: dict = field(default_factory=dict)
    sequence: tuple = ()

    def as_float(self) -> float:
        if isinstance(self.value, tuple):
            return tuple(float(v) for v in self.value)
        return float(self.value)


def _valuation_sequence(G: Sequence[RatMatrix], p: int) -> list:
    return [gauss_valuation_matrix(g, p) for g in G]


def _h_sequence(vG: Sequence, p: int, q) -> list[Fraction]:
    """h(n) = sup_{s<=n} log_p^+ |G_s / [s]_q!| for n = 0..N."""
    h = [Fraction(0)]
    best = Fraction(0)
    vfact = 0
    for s in range(1, len(vG)):
        vfact += q_int_valuation(s, p, q)
        if vG[s] != INF:
            best = max(best, Fraction(vfact - vG[s]))
        h.append(best)
    return h


def chi_truncated(S: QDiffSystem, p: int, N: int, G: Sequence[RatMatrix] | None = None) -> ChiBound:
    _require_good(S.q, p)
    if N < 1:
        raise DomainError("N must be positive")
    G = delta_matrices(S, N) if G is None else G
    h = _h_sequence(_valuation_sequence(G[: N + 1], p), p, S.q)
    seq = tuple(h[n] / n for n in range(1, N + 1))
    return ChiBound("truncated", -seq[-1], {"N": N, "p": p}, seq)


def _dwork_frobenius(coeffs: Sequence[RatFun], p: int) -> Fraction | None:
    mu = len(coeffs)
    vals = [gauss_valuation_matrix(RatMatrix(1, 1, [a]), p) for a in coeffs]
    if min(vals) >= 0:
        return None
    worst = max(Fraction(-v, mu - i) for i, v in enumerate(vals) if v != INF)
    return -Fraction(1, p - 1) - worst


def chi_bounds(S: QDiffSystem, p: int, cyclic_coeffs: Sequence | None = None,
               order_mod_p: int | None = None, order_mod_qk: int | None = None):
    """Every applicable closed-form statement about log_p chi.

    Returns (bounds, skipped) where skipped maps a bound kind to the unmet
    hypothesis. Unipotence orders are computed from the curvature when not
    supplied.
    """
    prof = _require_good(S.q, p)
    q, kappa = S.q, prof.kappa
    bounds: list[ChiBound] = []
    skipped: dict[str, str] = {}
    G1 = S.to_delta().G1
    vG = gauss_valuation_matrix(G1, p)
    sup_g = max(-vG, 0) if vG != INF else 0
    v_kappa = q_int_valuation(kappa, p, q)
    tail = Fraction(1, kappa * (p - 1))
    meta = {"p": p, "kappa": kappa, "ell": prof.ell}

    if not prof.strong:
        skipped["trivial"] = skipped["nilpotent_mod_p"] = skipped["unipotent_mod_qk"] = \
            "requires |1 - q^kappa|_p < |p|^(1/(p-1))"
        skipped["dwork_frobenius"] = "requires |1 - q|_p < |p|^(1/(p-1))"
        e = 1
        while not v_one_minus_q_power(q, e * kappa, p) > Fraction(1, p - 1):
            e += 1
        v_e = v_one_minus_q_power(q, e * kappa, p)
        upper_inv = sup_g + tail + Fraction(v_e, e * kappa)
        lower_inv = sup_g + Fraction(v_kappa, kappa)
        bounds.append(ChiBound("bad_regime_range", (-upper_inv, -lower_inv), dict(meta, e=e)))
        return bounds, skipped

    bounds.append(ChiBound("trivial", -Fraction(v_kappa, kappa) - tail - sup_g, dict(meta)))

    if order_mod_p is None:
        try:
            v = unipotent_order(S, p, MOD_P)
            order_mod_p = v.order
        except BadPrime:
            order_mod_p = None
    if order_mod_p is None:
        skipped["nilpotent_mod_p"] = "curvature not unipotent modulo p"
    elif v_kappa < 1:
        skipped["nilpotent_mod_p"] = "requires |[kappa]_q|_p <= |p| (kappa > 1)"
    else:
        n = order_mod_p
        bounds.append(ChiBound("nilpotent_mod_p",
                               Fraction(1, kappa * n) - Fraction(v_kappa, kappa) - tail,
                               dict(meta, n=n)))

    if order_mod_qk is None:
        try:
            v = unipotent_order(S, p, MOD_P_ELL)
            order_mod_qk = v.order
        except BadPrime:
            order_mod_qk = None
    if order_mod_qk is None:
        skipped["unipotent_mod_qk"] = "curvature not unipotent modulo 1 - q^kappa"
    else:
        n = order_mod_qk
        bounds.append(ChiBound("unipotent_mod_qk",
                               -Fraction((n - 1) * v_kappa, n * kappa) - tail, dict(meta, n=n)))

    if kappa != 1:
        skipped["dwork_frobenius"] = "requires kappa = 1"
    else:
        if cyclic_coeffs is None:
            if S.rank == 1:
                cyclic_coeffs = [G1[0, 0]]
            else:
                from .qmodule import cyclic_vector

                cv = cyclic_vector(S)
                cyclic_coeffs = delta_cyclic_coefficients(S, cv.m)
        coeffs = [c if isinstance(c, RatFun) else RatFun.const(as_fraction(c)) for c in cyclic_coeffs]
        val = _dwork_frobenius(coeffs, p)
        if val is None:
            skipped["dwork_frobenius"] = "requires sup |a_i| > 1"
        else:
            bounds.append(ChiBound("dwork_frobenius", val, dict(meta, exact=True)))
    return bounds, skipped


# ------------------------------------------------------------------ sizes


@dataclass
class SizeEstimate:
    N: int
    pmax: int
    partial_sum: float
    contributions: list  # (place, h) with place a prime or "inf"


def _series_coeffs(target) -> list[list[Fraction]]:
    """Per-degree coefficient lists (all matrix entries) of a series target."""
    if isinstance(target, FormalSolution):
        return [[v for row in Y for v in row] for Y in target.coeffs]
    return [[as_fraction(v)] for v in target]


def size_partial(target, N: int, pmax: int, G: Sequence[RatMatrix] | None = None) -> SizeEstimate:
    """Truncated size: (1/N) sum over places of h(., N, v), natural logarithms."""
    if N < 1:
        raise DomainError("N must be positive")
    if isinstance(target, QDiffSystem):
        S = target
        G = delta_matrices(S, N) if G is None else G
        contributions = []
        total = 0.0
        for p in primes_upto(pmax):
            prof = prime_profile(S.q, p)
            if not (prof.good and prof.strong):
                continue
            h = _h_sequence(_valuation_sequence(G[: N + 1], p), p, S.q)[N]
            val = float(h) * math.log(p)
            if val:
                contributions.append((p, val))
            total += val
        return SizeEstimate(N, pmax, total / N, contributions)

    coeffs = _series_coeffs(target)[: N + 1]
    if len(coeffs) < N + 1:
        raise DomainError("series has fewer than N+1 coefficients")
    contributions = []
    total = 0.0
    for p in primes_upto(pmax):
        worst = 0
        for row in coeffs:
            for a in row:
                if a:
                    worst = max(worst, -vp(a, p))
        if worst:
            val = worst * math.log(p)
            contributions.append((p, val))
            total += val
    arch = 0.0
    for row in coeffs:
        for a in row:
            if a:
                arch = max(arch, math.log(abs(a.numerator)) - math.log(a.denominator))
    if arch:
        contributions.append(("inf", arch))
    total += arch
    return SizeEstimate(N, pmax, total / N, contributions)


def kappa_sum_partial(q, pmax: int):
    """(sum over good p <= pmax of log p / (kappa_p (p-1)), table of partial sums)."""
    q = as_fraction(q)
    if q in (0, 1, -1):
        raise DomainError("q must not be 0 or +-1")
    total = 0.0
    table = []
    for p in primes_upto(pmax):
        if vp(q, p) != 0:
            continue
        kappa = multiplicative_order(q, p)
        term = math.log(p) / (kappa * (p - 1))
        total += term
        table.append((p, kappa, term, total))
    return total, table


def compare_kappa_profiles(q1, q2, pmax: int) -> dict:
    q1, q2 = as_fraction(q1), as_fraction(q2)
    mismatches = []
    for p in primes_upto(pmax):
        if vp(q1, p) != 0 or vp(q2, p) != 0:
            continue
        k1, k2 = multiplicative_order(q1, p), multiplicative_order(q2, p)
        if k1 != k2:
            mismatches.append((p, k1, k2))
    return {"equal_orders_everywhere": not mismatches, "mismatches": mismatches}
