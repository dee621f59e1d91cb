"""
Numeric runs of the block methods on explicit first-order oracles.

An oracle maps a point (tuple of per-block arrays) to (value, gradient blocks).
Replaying a method on the oracle built from an extracted worst case must visit
exactly the reconstructed points and reach the PEP value.
"""

from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence, Union

import numpy as np

from pepbcd.algos.cacd import theta_schedule
from pepbcd.algos.spec import MethodKind, MethodSpec
from pepbcd.core.errors import ConstructionError, ReplayError, StructuralError
from pepbcd.core.interp import NumericTriplet
from pepbcd.core.utils import logger
from pepbcd.pep.certificates import WorstCaseInstance

REPLAY_TOL = 1e-6


class Oracle(Protocol):
    def __call__(self, x) -> tuple[float, tuple]:
        ...


class InstanceOracle:
    """Looks gradients and values up in a worst-case instance."""

    def __init__(self, instance: WorstCaseInstance, tol: float = REPLAY_TOL):
        self.instance = instance
        self.tol = tol

    def __call__(self, x) -> tuple[float, tuple]:
        hit = self.instance.lookup(x, self.tol)
        if hit is None:
            flat = np.concatenate([np.asarray(b, dtype=float) for b in x])
            raise ReplayError(f"Point {np.array2string(flat, precision=4)} is not among the reconstructed points")
        return hit.f, hit.g


class QuadraticOracle:
    """f(x) = 1/2 x^T A x + b^T x + c on blocks of the given dimensions."""

    def __init__(self, A, dims: Sequence[int], b=None, c: float = 0.0):
        self.A = np.asarray(A, dtype=float)
        self.dims = tuple(int(d) for d in dims)
        n = sum(self.dims)
        if self.A.shape != (n, n):
            raise StructuralError(f"A has shape {self.A.shape}, blocks need {(n, n)}")
        if not np.allclose(self.A, self.A.T):
            raise StructuralError("A must be symmetric")
        self.b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
        self.c = float(c)
        self._splits = np.cumsum(self.dims)[:-1]

    def __call__(self, x) -> tuple[float, tuple]:
        xf = np.concatenate([np.atleast_1d(np.asarray(b, dtype=float)) for b in x])
        grad = self.A @ xf + self.b
        value = 0.5 * float(xf @ self.A @ xf) + float(self.b @ xf) + self.c
        return value, tuple(np.split(grad, self._splits))

    def block_lipschitz(self) -> tuple[float, ...]:
        """Largest eigenvalue of every diagonal block of A."""
        out, start = [], 0
        for d in self.dims:
            sub = self.A[start:start + d, start:start + d]
            out.append(float(np.linalg.eigvalsh(sub).max()))
            start += d
        return tuple(out)

    def minimum(self) -> float:
        xs = np.linalg.lstsq(self.A, -self.b, rcond=None)[0]
        return self(tuple(np.split(xs, self._splits)))[0]


def _blocks(x) -> tuple:
    return tuple(np.atleast_1d(np.asarray(b, dtype=float)).copy() for b in x)


def run_ccd_numeric(spec: MethodSpec, oracle: Oracle, x0) -> list[NumericTriplet]:
    """Triplets x0..xN of a CCD or custom fixed-step run."""
    if spec.kind not in (MethodKind.CCD, MethodKind.CUSTOM):
        raise ConstructionError(f"run_ccd_numeric cannot run {spec.kind.value}")
    x0 = _blocks(x0)
    if len(x0) != spec.p:
        raise StructuralError(f"Start point has {len(x0)} blocks for p={spec.p}")
    visited = []
    x = x0
    grads = []
    for i in range(spec.n_steps + 1):
        f, g = oracle(x)
        visited.append(NumericTriplet(x, g, f, f"x{i}"))
        grads.append(g)
        if i == spec.n_steps:
            break
        if spec.kind is MethodKind.CCD:
            block = spec.order[i]
            x = list(x)
            x[block - 1] = x[block - 1] - spec.schedule.block(block) * g[block - 1]
            x = tuple(x)
        else:
            x = list(_blocks(x0))
            for k, a in enumerate(spec.alpha[i]):
                pos = spec.order[k] - 1
                x[pos] = x[pos] - a * grads[k][pos]
            x = tuple(x)
    return visited


def run_cacd_numeric(spec: MethodSpec, oracle: Oracle, x0) -> list[NumericTriplet]:
    """Triplets at x0 = y0, y1..y_{N-1} and x_N."""
    if spec.kind is not MethodKind.CACD:
        raise ConstructionError(f"run_cacd_numeric expects a CACD spec, got {spec.kind.value}")
    p, n = spec.p, spec.n_steps
    thetas = theta_schedule(p, n)
    x = z = _blocks(x0)
    visited = []
    for i in range(n):
        y = x if i == 0 else tuple((1.0 - thetas[i]) * xb + thetas[i] * zb for xb, zb in zip(x, z))
        f, g = oracle(y)
        visited.append(NumericTriplet(y, g, f, "x0" if i == 0 else f"y{i}"))
        block = spec.order[i]
        pos = block - 1
        z_new = list(z)
        z_new[pos] = z[pos] - (spec.schedule.block(block) / (p * thetas[i])) * g[pos]
        x = tuple(yb + (p * thetas[i]) * (zn - zb) for yb, zn, zb in zip(y, z_new, z))
        z = tuple(z_new)
    f, g = oracle(x)
    visited.append(NumericTriplet(x, g, f, f"x{n}"))
    return visited


def check_am_instance(spec: MethodSpec, instance: WorstCaseInstance, tol: float = REPLAY_TOL) -> dict:
    """
    Exact block minimization leaves the other blocks in place and zeroes the
    partial gradient of the updated block. Returns the worst squared residuals.
    """
    if spec.kind is not MethodKind.AM:
        raise ConstructionError(f"check_am_instance expects an AM spec, got {spec.kind.value}")
    moved, stationary = 0.0, 0.0
    for i in range(1, spec.n_steps + 1):
        block = spec.order[i - 1]
        prev, cur = instance.triplet(f"x{i - 1}"), instance.triplet(f"x{i}")
        for s in range(spec.p):
            if s != block - 1:
                moved = max(moved, float(np.sum((cur.x[s] - prev.x[s]) ** 2)))
        stationary = max(stationary, float(np.sum(cur.g[block - 1] ** 2)))
    return {"immobile": moved, "stationary": stationary, "passed": max(moved, stationary) <= tol}


@dataclass
class ReplayReport:
    method: str
    values: list = field(default_factory=list)
    final_value: float = float("nan")
    expected: Optional[float] = None
    deviation: float = float("nan")
    passed: bool = False
    tol: float = REPLAY_TOL
    error: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "values": self.values,
            "final_value": self.final_value,
            "expected": self.expected,
            "deviation": self.deviation,
            "passed": self.passed,
            "tol": self.tol,
            "error": self.error,
            **self.extra,
        }


def numeric_replay(
    method: MethodSpec,
    source: Union[WorstCaseInstance, Oracle],
    x0=None,
    expected: Optional[float] = None,
    tol: float = REPLAY_TOL,
) -> ReplayReport:
    """
    Runs `method` from x0 on a worst-case instance (x0 defaults to its start
    point, the expected value to its PEP value) or on any explicit oracle.
    """
    report = ReplayReport(method.describe(), tol=tol)
    if isinstance(source, WorstCaseInstance):
        x0 = source.triplet("x0").x if x0 is None else x0
        expected = source.value if expected is None else expected
        oracle = InstanceOracle(source, tol)
    else:
        if x0 is None:
            raise ConstructionError("Replaying on an explicit oracle needs a start point")
        oracle = source
    report.expected = expected

    try:
        if method.kind is MethodKind.AM:
            if not isinstance(source, WorstCaseInstance):
                raise ConstructionError("Alternating minimization replays only on worst-case instances")
            report.extra = check_am_instance(method, source, tol)
            visited = [source.triplet(f"x{i}") for i in range(method.n_steps + 1)]
        elif method.kind is MethodKind.CACD:
            visited = run_cacd_numeric(method, oracle, x0)
        else:
            visited = run_ccd_numeric(method, oracle, x0)
    except ReplayError as e:
        logger.warning(f"Replay of {report.method} diverged from the instance: {e}")
        report.error = str(e)
        return report

    report.values = [t.f for t in visited]
    report.final_value = visited[-1].f
    if expected is None:
        report.passed = report.extra.get("passed", True)
    else:
        report.deviation = abs(report.final_value - expected)
        report.passed = report.deviation <= tol * max(1.0, abs(expected)) and report.extra.get("passed", True)
    return report
