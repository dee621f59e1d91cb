"""Closed-form comparison bounds from the block coordinate descent literature."""

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from pepbcd.core.errors import DomainError
from pepbcd.core.expr import LipschitzVector

LipschitzLike = Union[LipschitzVector, Sequence[float]]


def _lipschitz(L: LipschitzLike) -> LipschitzVector:
    return L if isinstance(L, LipschitzVector) else LipschitzVector(tuple(L))


def beck_descent_constant(p: int, L: LipschitzLike) -> float:
    """Per-cycle descent constant C = 1 / (4 L_max (1 + p^3 L_max^2 / L_min^2))."""
    L = _lipschitz(L)
    return 1.0 / (4.0 * L.L_max * (1.0 + p ** 3 * L.L_max ** 2 / L.L_min ** 2))


def beck_ccd_bound(p: int, K: int, L: LipschitzLike, R_a: float) -> float:
    """
    f(x_{pK}) - f_* <= 4 L_max (1 + p^3 L_max^2 / L_min^2) R_a^2 / (K + 8/p)
    for cyclic coordinate descent with steps 1/L_l.
    """
    L = _lipschitz(L)
    if L.p != p:
        raise DomainError(f"L has {L.p} entries for p={p}")
    return R_a ** 2 / (beck_descent_constant(p, L) * (K + 8.0 / p))


def am_bound(K: int, L: LipschitzLike, R_a: float) -> float:
    """Two-block alternating minimization: 2 min(L_1, L_2) R_a^2 / (K - 1)."""
    L = _lipschitz(L)
    if L.p != 2:
        raise DomainError(f"The alternating minimization bound covers p=2 only, got p={L.p}")
    if K < 2:
        raise DomainError(f"The alternating minimization bound needs K >= 2, got K={K}")
    return 2.0 * L.L_min * R_a ** 2 / (K - 1)


def racd_expected_bound(p: int, N: int, f0_gap: float, init_L_dist_sq: float) -> float:
    """
    E[f(x_N)] - f_* <= 4 p^2 R^2 / (N - 1 + 2p)^2 with
    R^2 = (1 - 1/p)(f(x_0) - f_*) + ||x_0 - x_*||_L^2 / 2.
    """
    if N < 1:
        raise DomainError(f"The random accelerated bound needs N >= 1, got N={N}")
    r2 = (1.0 - 1.0 / p) * f0_gap + 0.5 * init_L_dist_sq
    return 4.0 * p ** 2 * r2 / (N - 1 + 2 * p) ** 2


def racd_init_bound(p: int, N: int, radius: float) -> float:
    """
    The expectation bound under ||x_0 - x_*||_L <= R, using f(x_0) - f_* <= (p/2) R^2
    (f is p-smooth with respect to the L-weighted norm).
    """
    r2 = radius ** 2
    return racd_expected_bound(p, N, 0.5 * p * r2, r2)


def semi_analytic_bound(C: float, p: int, K: int, L: LipschitzLike, R: float) -> list[float]:
    """f(x_{kp}) - f_* <= (1/C) R^2 / (k + m), m = 2 / (p L_max C), for k = 1..K."""
    if not C > 0:
        raise DomainError(f"The descent constant must be positive, got C={C}")
    L = _lipschitz(L)
    m = 2.0 / (p * L.L_max * C)
    return [R ** 2 / (C * (k + m)) for k in range(1, K + 1)]


@dataclass
class BlowupReport:
    eps: float
    K: int
    L: tuple[float, float]
    iterates: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    R_a: float = 0.0
    final_gap: float = 0.0
    beck_bound: float = 0.0

    @property
    def inflation(self) -> float:
        """Ratio of the cycle-end bound to the gap actually reached."""
        return self.beck_bound / self.final_gap if self.final_gap > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "K": self.K,
            "L": list(self.L),
            "iterates": [list(xy) for xy in self.iterates],
            "distances": self.distances,
            "R_a": self.R_a,
            "final_gap": self.final_gap,
            "beck_bound": self.beck_bound,
            "inflation": self.inflation,
        }


def blowup_objective(eps: float, x: float, y: float) -> float:
    return (x - y) ** 2 + eps * (x ** 2 + y ** 2)


def blowup_example(eps: float, K: int) -> BlowupReport:
    """
    Two-block CCD on f(x, y) = (x - y)^2 + eps (x^2 + y^2) from (1, -1) with step
    1/(2(1 + eps)). One cycle maps (x, y) to (y/(1+eps), y/(1+eps)^2). The unique
    minimizer is the origin, so R_a is the largest cycle-end norm.
    """
    if not eps > 0:
        raise DomainError(f"The blow-up family needs eps > 0, got {eps}")
    if K < 1:
        raise DomainError(f"K must be at least 1, got {K}")
    lip = 2.0 * (1.0 + eps)
    x, y = 1.0, -1.0
    iterates = [(x, y)]
    for _ in range(K):
        x = y / (1.0 + eps)
        y = x / (1.0 + eps)
        iterates.append((x, y))
    distances = [float(np.hypot(*xy)) for xy in iterates[1:]]
    R_a = max(distances)
    return BlowupReport(
        eps=eps,
        K=K,
        L=(lip, lip),
        iterates=iterates,
        distances=distances,
        R_a=R_a,
        final_gap=blowup_objective(eps, *iterates[-1]),
        beck_bound=beck_ccd_bound(2, K, (lip, lip), R_a),
    )
