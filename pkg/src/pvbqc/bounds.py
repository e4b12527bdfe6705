"""Concentration bounds, fidelity certificates and resource counts.

All functions are pure. Probabilities are reported exactly as computed; a
certificate whose confidence is not positive is flagged ``vacuous`` rather
than clamped.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from decimal import Decimal, localcontext

from .errors import InvalidParams, LambdaOutOfRange, ThresholdExceeded, TooSmallN

MIN_N = 6

# 7/3 + 2/sqrt(6): the constant that actually falls out of the arbiter derivation
APPENDIX_CONSTANT = 7.0 / 3.0 + 2.0 / math.sqrt(6.0)
THEOREM_CONSTANT = 3.0


@dataclass(frozen=True)
class SerflingParams:
    N: int
    K: int
    v: float

    @property
    def T(self) -> int:
        return self.N + self.K


@dataclass(frozen=True)
class AzumaParams:
    ranges: tuple[tuple[float, float], ...]
    t: float

    @property
    def m(self) -> int:
        return len(self.ranges)

    @classmethod
    def uniform(cls, m: int, a: float, b: float, t: float) -> "AzumaParams":
        return cls(((a, b),) * m, t)


@dataclass(frozen=True)
class ProtocolPlan:
    n: int
    K: int

    @property
    def copies(self) -> int:
        return 5 * self.K

    @property
    def C_client(self) -> float:
        return self.K / (2 * self.n)

    @property
    def C_arbiter(self) -> float:
        return 3 * self.K / (4 * self.n)

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "copies": self.copies,
            "C_client": self.C_client,
            "C_arbiter": self.C_arbiter,
        }


@dataclass(frozen=True)
class FidelityCertificate:
    role: str
    n: int
    K: int
    observed_failures: int
    lam: float
    fidelity_bound: float
    confidence_bound: float
    constant_variant: str

    @property
    def vacuous(self) -> bool:
        return self.confidence_bound <= 0

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["vacuous"] = self.vacuous
        return rec


def serfling_bound(p: SerflingParams) -> float:
    """Lower bound on ``Pr[sum over unsampled <= (N/K) sum over sampled + N v]``
    when K of N + K binary values are sampled without replacement."""
    if p.N < 1 or p.K < 1 or not 0 < p.v < 1:
        raise InvalidParams(f"need N >= 1, K >= 1, 0 < v < 1; got {p}")
    N, K, v = p.N, p.K, p.v
    return -math.expm1(-2.0 * v * v * N * K * K / ((N + K) * (K + 1)))


def azuma_hoeffding_bound(p: AzumaParams) -> float:
    """Lower bound on ``Pr[mean - E[mean] <= t]`` for independent bounded variables.

    Uses the squared-range denominator ``sum (b_i - a_i)^2``.
    """
    if p.m < 1 or p.t <= 0:
        raise InvalidParams(f"need at least one variable and t > 0; got m={p.m}, t={p.t}")
    if any(b < a for a, b in p.ranges):
        raise InvalidParams("every range needs b >= a")
    denom = sum((b - a) ** 2 for a, b in p.ranges)
    if denom == 0:
        return 1.0
    return -math.expm1(-2.0 * p.m * p.m * p.t * p.t / denom)


def plan_parameters(n: int) -> ProtocolPlan:
    """``K = ceil(n^2 ln n)``; 5K copies, thresholds K/(2n) and 3K/(4n)."""
    if n < MIN_N:
        raise TooSmallN(f"n must be >= {MIN_N}, got {n}")
    return ProtocolPlan(n, math.ceil(n * n * math.log(n)))


def custom_plan(n: int, K: int) -> ProtocolPlan:
    """A plan with a hand-picked K (cheap experiments, tests)."""
    if n < MIN_N:
        raise TooSmallN(f"n must be >= {MIN_N}, got {n}")
    if K < 2:
        raise InvalidParams(f"K must be >= 2, got {K}")
    return ProtocolPlan(n, K)


def lambda_range(n: int, role: str) -> tuple[float, float]:
    if n < MIN_N:
        raise TooSmallN(f"n must be >= {MIN_N}, got {n}")
    if role == "client":
        return math.log(16) / math.log(n), (n - 1) ** 2 / 16
    if role == "arbiter":
        return math.log(4) / math.log(n), (n - 1) ** 2 / 10
    raise InvalidParams(f"role must be 'client' or 'arbiter', got {role!r}")


def default_lambda(n: int, role: str) -> float:
    """Upper end of the valid range, where the confidence bound is largest."""
    return lambda_range(n, role)[1]


def _check_lambda(n: int, role: str, lam: float) -> None:
    lo, hi = lambda_range(n, role)
    # tolerate rounding at the endpoints, e.g. log_16 16
    if not lo - 1e-12 <= lam <= hi + 1e-12:
        raise LambdaOutOfRange(f"{role} lambda {lam} outside [{lo:.6g}, {hi:.6g}] for n={n}")


def arbiter_certificate(n: int, K: int, failures: int, lam: float, variant: str = "appendix") -> FidelityCertificate:
    if failures > 3 * K / (4 * n):
        raise ThresholdExceeded(f"{failures} failures > 3K/(4n) = {3 * K / (4 * n):.6g}")
    _check_lambda(n, "arbiter", lam)
    if variant == "appendix":
        c = APPENDIX_CONSTANT
    elif variant == "theorem":
        c = THEOREM_CONSTANT
    else:
        raise InvalidParams(f"variant must be 'appendix' or 'theorem', got {variant!r}")
    return FidelityCertificate(
        role="arbiter",
        n=n,
        K=K,
        observed_failures=failures,
        lam=lam,
        fidelity_bound=1 - (c * math.sqrt(lam) + 1) / n,
        confidence_bound=1 - 4 * n ** (-lam),
        constant_variant=variant,
    )


def client_certificate(n: int, K: int, failures: int, lam: float) -> FidelityCertificate:
    if failures > K / (2 * n):
        raise ThresholdExceeded(f"{failures} failures > K/(2n) = {K / (2 * n):.6g}")
    _check_lambda(n, "client", lam)
    return FidelityCertificate(
        role="client",
        n=n,
        K=K,
        observed_failures=failures,
        lam=lam,
        fidelity_bound=1 - (4 * math.sqrt(lam) + 1) / n,
        confidence_bound=1 - 4 * n ** (-lam / 2),
        constant_variant="theorem",
    )


def fidelity_estimate_from_counts(v: float, t: float, K: int, failures: int) -> float:
    """``1 - (7/3) v - 2 t - 4 (K1 + K2) / (3K)``."""
    if not 0 < v < 1 or t <= 0 or K < 1 or failures < 0:
        raise InvalidParams(f"need 0 < v < 1, t > 0, K >= 1, failures >= 0; got v={v}, t={t}, K={K}")
    return 1 - (7.0 / 3.0) * v - 2 * t - 4.0 * failures / (3.0 * K)


def arbiter_confidence_product(K: int, v: float, t: float) -> float:
    """The un-simplified confidence ``[1-e^{-Kv^2}]^2 [1-e^{-6Kt^2}]^2``."""
    return (-math.expm1(-K * v * v)) ** 2 * (-math.expm1(-6 * K * t * t)) ** 2


# ---------------------------------------------------------------------------
# resource comparison


def sato_min_params(n: int) -> tuple[int, int]:
    """Smallest ``(k, m)`` allowed by the comparison table: ``k = 4n^2 - 1``,
    ``m = ceil(2 ln 2 * k^n * n^5)``."""
    k = 4 * n * n - 1
    return k, _ceil_2ln2_times(k**n * n**5)


def _ceil_2ln2_times(a: int) -> int:
    with localcontext() as ctx:
        ctx.prec = len(str(a)) + 30
        val = Decimal(a) * 2 * Decimal(2).ln()
        return int(val.to_integral_value(rounding="ROUND_CEILING"))


@dataclass(frozen=True)
class CostReport:
    n: int
    K: int
    our_copies: int
    our_measurements: int
    sato_k: int
    sato_m: int
    sato_copies: int
    sato_measurements: int

    @property
    def copies_ratio_log10(self) -> float:
        return math.log10(self.sato_copies) - math.log10(self.our_copies)

    def to_record(self) -> dict:
        # the Sato numbers overflow JSON doubles; keep them exact as strings
        rec = asdict(self)
        for key in ("sato_m", "sato_copies", "sato_measurements"):
            rec[key] = str(rec[key])
        rec["copies_ratio_log10"] = self.copies_ratio_log10
        return rec


def cost_comparison(n: int, sato_k: int | None = None, sato_m: int | None = None) -> CostReport:
    """Copies and local measurements of this protocol against the earlier Sato-style protocol.

    Ours: 5K copies and 2K*n verification measurements. Theirs: 2k + m + 1
    copies and k*n*2^n measurements (worst-case stabilizer decomposition).
    """
    plan = plan_parameters(n)
    k_min, m_min = sato_min_params(n)
    k = k_min if sato_k is None else sato_k
    if k < k_min:
        raise InvalidParams(f"sato k must be >= 4n^2 - 1 = {k_min}, got {k}")
    m_floor = m_min if k == k_min else _ceil_2ln2_times(k**n * n**5)
    m = m_floor if sato_m is None else sato_m
    if m < m_floor:
        raise InvalidParams(f"sato m must be >= 2 ln2 k^n n^5 = {m_floor}, got {m}")
    return CostReport(
        n=n,
        K=plan.K,
        our_copies=plan.copies,
        our_measurements=2 * plan.K * n,
        sato_k=k,
        sato_m=m,
        sato_copies=2 * k + m + 1,
        sato_measurements=k * n * 2**n,
    )


def binomial_sigma(p: float, trials: int) -> float:
    """Standard error of an empirical frequency with true rate ``p``."""
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def check_coverage(frequency: float, bound: float, trials: int, nsigma: float = 3.0) -> bool:
    """Empirical frequency is compatible with a lower bound at ``nsigma``."""
    b = min(max(bound, 0.0), 1.0)
    return frequency >= b - nsigma * binomial_sigma(b, trials)

