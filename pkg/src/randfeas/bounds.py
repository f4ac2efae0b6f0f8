"""Closed-form bounds on the expected quality of random feasible solutions.

Every function here is a pure numeric evaluation in double precision.  The
random vector of per-object costs is summarised by a :class:`MomentSpec`
(mean and standard deviation of a symmetric law) and the problem by a
:class:`ProblemShape` (object count ``k``, a lower bound ``m`` on the optimal
solution size, an upper bound ``ell`` on any feasible solution size).

Two trimmed sums drive everything:

* ``Y*`` -- the sum of the ``m`` smallest order statistics (best possible
  solution of size ``m``), bounded below by :func:`trimmed_min_sum_lower_bound`;
* ``Y``  -- the sum of the ``ell`` largest (costliest solution of size
  ``ell``), bounded above by :func:`trimmed_max_sum_upper_bound`.

:func:`approx_factor_bound` combines them into a bound on
``1 + |E[Y] - E[Y*]| / |E[Y*]|`` and lists the constant simplifications.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DegenerateBound, PreconditionViolated

__all__ = [
    "MomentSpec",
    "ProblemShape",
    "OrderIndex",
    "BoundCase",
    "ConstantKind",
    "SimplifiedConstant",
    "BoundReport",
    "harmonic_half",
    "harmonic_half_bounds",
    "order_stat_expectation_bounds",
    "trimmed_min_sum_lower_bound",
    "trimmed_max_sum_upper_bound",
    "case_threshold",
    "approx_factor",
    "approx_factor_bound",
    "corollary1_predicate",
    "steiner_specific_bound",
]

SIGMA_K_NOTE = "sigma*k is the product sigma times k"


@dataclass(frozen=True)
class MomentSpec:
    """Mean and standard deviation of the per-object cost distribution."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise PreconditionViolated(f"non-finite moments: mu={self.mu}, sigma={self.sigma}")
        if not self.sigma > 0:
            raise PreconditionViolated(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class ProblemShape:
    k: int
    m: int
    ell: int

    def __post_init__(self):
        for name in ("k", "m", "ell"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise PreconditionViolated(f"{name} must be a positive integer, got {value!r}")
        if self.m > self.k or self.ell > self.k:
            raise PreconditionViolated(f"need m <= k and ell <= k, got {self}")

    @property
    def theorem4_eligible(self) -> bool:
        return 2 * self.m <= self.k and 2 * (self.ell - 1) <= self.k


@dataclass(frozen=True)
class OrderIndex:
    r: int
    k: int

    def __post_init__(self):
        if not (1 <= self.r <= self.k):
            raise PreconditionViolated(f"need 1 <= r <= k, got r={self.r}, k={self.k}")


class BoundCase(enum.Enum):
    NEGATIVE_DENOMINATOR = "NegativeDenominator"
    POSITIVE_DENOMINATOR = "PositiveDenominator"
    DEGENERATE = "Degenerate"


class ConstantKind(enum.Enum):
    TWO = "Two"
    THREE = "Three"
    FOUR = "Four"
    EPSILON_GE_2 = "EpsilonGE2"
    EPSILON_GE_K = "EpsilonGEk"


@dataclass(frozen=True)
class SimplifiedConstant:
    kind: ConstantKind
    value: float
    condition: str


@dataclass
class BoundReport:
    case_id: BoundCase
    threshold: float
    exact_value: float | None
    relaxed_value: float | None
    simplified_constants: list[SimplifiedConstant] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def constant(self, kind: ConstantKind) -> SimplifiedConstant | None:
        for c in self.simplified_constants:
            if c.kind is kind:
                return c
        return None

    def has(self, kind: ConstantKind) -> bool:
        return self.constant(kind) is not None

    @property
    def headline(self) -> float | None:
        """Smallest reported constant, never the ``eps >= k`` one."""
        values = [c.value for c in self.simplified_constants if c.kind is not ConstantKind.EPSILON_GE_K]
        if values:
            return min(values)
        return self.relaxed_value if self.relaxed_value is not None else self.exact_value


def harmonic_half(n: int) -> float:
    """Generalized harmonic number of order 1/2: sum of 1/sqrt(i) for i = 1..n."""
    if n < 1:
        raise PreconditionViolated(f"n must be >= 1, got {n}")
    total = 0.0
    for i in range(1, n + 1):
        total += 1.0 / math.sqrt(i)
    return total


def harmonic_half_bounds(n: int) -> tuple[float, float]:
    """Return ``(2*sqrt(n+1) - 2, 2*sqrt(n) - 1)``.

    The lower value is a strict bound on :func:`harmonic_half`, the upper one
    is attained at ``n = 1``.
    """
    if n < 1:
        raise PreconditionViolated(f"n must be >= 1, got {n}")
    return 2.0 * math.sqrt(n + 1) - 2.0, 2.0 * math.sqrt(n) - 1.0


# Branch formulas for the per-rank bounds, scaled to unit sigma.
def _lower_low_rank(r: int, k: int) -> float:
    return math.sqrt(k / (2 * r))


def _lower_high_rank(r: int, k: int) -> float:
    return math.sqrt(k * (k - r) / (2 * r * r))


def _upper_high_rank(r: int, k: int) -> float:
    return math.sqrt(k / (2 * (k - r + 1)))


def _upper_low_rank(r: int, k: int) -> float:
    return math.sqrt(k * (r - 1) / (2 * (k - r + 1) ** 2))


def order_stat_expectation_bounds(idx: OrderIndex, mom: MomentSpec) -> tuple[float, float]:
    """Lower and upper bounds on E[X_(r:k)] for a symmetric law.

    Branches are selected with exact integer comparisons (``2r <= k`` and
    ``2(r-1) >= k``); both formulas agree at the boundary ranks.
    """
    r, k = idx.r, idx.k
    if 2 * r <= k:
        lower = mom.mu - mom.sigma * _lower_low_rank(r, k)
    else:
        lower = mom.mu - mom.sigma * _lower_high_rank(r, k)
    if 2 * (r - 1) >= k:
        upper = mom.mu + mom.sigma * _upper_high_rank(r, k)
    else:
        upper = mom.mu + mom.sigma * _upper_low_rank(r, k)
    return lower, upper


def _min_sum_spread(k: int, m: int) -> float:
    return math.sqrt(2 * k) * (math.sqrt(m + 1) - 1.0)


def _max_sum_spread(k: int, ell: int) -> float:
    return math.sqrt(2 * k) / 2.0 * (2.0 * math.sqrt(ell) - 1.0)


def trimmed_min_sum_lower_bound(shape: ProblemShape, mom: MomentSpec) -> float:
    """Strict lower bound ``m*mu - sigma*sqrt(2k)*(sqrt(m+1) - 1)`` on E[Y*]."""
    if 2 * shape.m > shape.k:
        raise PreconditionViolated(f"need 2m <= k, got m={shape.m}, k={shape.k}")
    return shape.m * mom.mu - mom.sigma * _min_sum_spread(shape.k, shape.m)


def trimmed_max_sum_upper_bound(shape: ProblemShape, mom: MomentSpec) -> float:
    """Upper bound ``ell*mu + sigma*sqrt(2k)/2*(2*sqrt(ell) - 1)`` on E[Y]."""
    if 2 * (shape.ell - 1) > shape.k:
        raise PreconditionViolated(f"need 2(ell-1) <= k, got ell={shape.ell}, k={shape.k}")
    return shape.ell * mom.mu + mom.sigma * _max_sum_spread(shape.k, shape.ell)


def case_threshold(shape: ProblemShape, mom: MomentSpec) -> float:
    """The mean at which the lower bound on E[Y*] crosses zero."""
    return mom.sigma * _min_sum_spread(shape.k, shape.m) / shape.m


def approx_factor(y: float, y_star: float) -> float:
    """``1 + |(y - y_star) / y_star|``; shared by the bounds and the sampler."""
    return 1.0 + abs((y - y_star) / y_star)


def approx_factor_bound(shape: ProblemShape, mom: MomentSpec) -> BoundReport:
    """Piecewise bound on the expected approximation factor.

    The case is chosen by comparing ``mu`` with :func:`case_threshold` using
    exact float comparison.  ``exact_value`` plugs the two trimmed-sum bounds
    straight into the factor; ``relaxed_value`` is the coarser closed form.
    All simplified constants whose side conditions hold are reported.
    """
    if not shape.theorem4_eligible:
        raise PreconditionViolated(f"shape not eligible (need 2m <= k and 2(ell-1) <= k): {shape}")
    k, m, ell = shape.k, shape.m, shape.ell
    mu, sigma = mom.mu, mom.sigma
    sk = sigma * k
    t = case_threshold(shape, mom)
    lb = trimmed_min_sum_lower_bound(shape, mom)
    ub = trimmed_max_sum_upper_bound(shape, mom)
    notes = [SIGMA_K_NOTE]

    if mu == t:
        notes.append("mu equals the threshold: the E[Y*] lower bound is zero, factor unbounded")
        return BoundReport(BoundCase.DEGENERATE, t, None, None, [], notes)

    exact = approx_factor(ub, lb)
    constants: list[SimplifiedConstant] = []

    if mu < t:
        case = BoundCase.NEGATIVE_DENOMINATOR
        # sigma*k >= sigma*sqrt(2k)*(sqrt(m+1)-1) > m*mu for eligible shapes
        relaxed = (ell * mu - 2 * m * mu + 3 * sk) / (sk - m * mu)

        if ell * mu <= -sk or m * mu > sk:
            constants.append(SimplifiedConstant(
                ConstantKind.TWO, 2.0, "mu < t and (ell*mu <= -sigma*k or m*mu > sigma*k)"))
        if mu <= 0:
            constants.append(SimplifiedConstant(ConstantKind.THREE, 3.0, "mu <= 0"))
        if mu * (ell + 2 * m) <= sk:
            constants.append(SimplifiedConstant(
                ConstantKind.FOUR, 4.0, "mu*(ell + 2m) <= sigma*k (with mu < t)"))
        # mu*(ell - 2m + eps*m) = sigma*k*(eps - 3) solved for eps.  With
        # ell - 2m + eps*m >= ell > 0 and sigma*k - m*mu > 0 the side condition
        # is equivalent to relaxed <= eps, so it holds for eps = max(2, relaxed).
        eps = max(2.0, (ell * mu - 2 * m * mu + 3 * sk) / (sk - m * mu))
        constants.append(SimplifiedConstant(
            ConstantKind.EPSILON_GE_2, eps,
            "mu <= sigma*k*(eps-3)/(ell - 2m + eps*m) < t, smallest eps >= 2"))
    else:
        case = BoundCase.POSITIVE_DENOMINATOR
        relaxed_den = m * mu - sk
        if relaxed_den > 0:
            relaxed = (ell * mu + sk) / relaxed_den
        else:
            relaxed = None
            notes.append("relaxed form undefined: m*mu - sigma*k <= 0")
        if mu * (ell + 2 * m) <= sk:
            notes.append("mu*(ell + 2m) <= sigma*k holds but the constant 4 "
                         "only follows from the negative-denominator form; not reported")
        eps_k = k + ell * mu / sigma
        if relaxed is not None and relaxed <= eps_k:
            constants.append(SimplifiedConstant(
                ConstantKind.EPSILON_GE_K, eps_k, "t < mu <= sigma*(eps - k)/ell, eps = k + ell*mu/sigma"))
        else:
            notes.append(f"eps >= k side condition holds at eps={eps_k!r} but the relaxed "
                         "value does not lie below it; not reported")

    for c in constants:
        notes.append(f"{c.kind.value}: {c.condition}")
    return BoundReport(case, t, exact, relaxed, constants, notes)


def corollary1_predicate(shape: ProblemShape, mom: MomentSpec) -> bool:
    """Hypothesis under which the bound is claimed to collapse to 3.

    Encoded literally: ``ell > exp(2*sqrt(m+1) - 3)``, ``mu`` above the case
    threshold, and ``m <= ell <= k/2``.
    """
    m, ell, k = shape.m, shape.ell, shape.k
    return (
        ell > math.exp(2.0 * math.sqrt(m + 1) - 3.0)
        and mom.mu > case_threshold(shape, mom)
        and m <= ell
        and 2 * ell <= k
    )


def steiner_specific_bound(n: int, alpha: int, mom: MomentSpec) -> float:
    """Bound for a Steiner network on ``n`` vertices with ``alpha`` terminals.

    Uses ``k = C(n, 2)``, ``m = floor(alpha/2)`` and ``ell = n - 1`` in the
    negative-denominator relaxed form; tends to 3 as ``n`` grows.
    """
    if n < 4:
        raise PreconditionViolated(f"n must be >= 4, got {n}")
    if not (2 <= alpha <= n):
        raise PreconditionViolated(f"need 2 <= alpha <= n, got alpha={alpha}, n={n}")
    pairs = n * (n - 1) // 2
    half = alpha // 2
    den = mom.sigma * pairs - mom.mu * half
    if not den > 0:
        raise DegenerateBound(f"denominator sigma*C(n,2) - mu*floor(alpha/2) = {den} <= 0")
    num = mom.mu * (n - 1) + 3 * mom.sigma * pairs - 2 * mom.mu * half
    return num / den
