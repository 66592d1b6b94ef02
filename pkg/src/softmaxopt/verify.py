"""Independent numerical oracles and spectral checks.

The finite-difference routines here deliberately evaluate only scalar loss
callbacks, never the closed-form derivatives they are used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .calculus import b_matrix, exp_kernel, hessian_total_at
from .exceptions import (
    AsymmetricMatrix,
    DomainError,
    MidNotPD,
    MissingPlantedOptimum,
    NonFiniteEvaluation,
    SamplingFailure,
)
from .model import ProblemInstance, make_state

FD_STEP = 1e-5
# Second differences divide by h^2, so the Hessian stencil needs a larger
# step than the gradient stencil to stay above float64 cancellation noise.
FD_HESS_STEP = 1e-4

# Absolute floor added to spectral pass thresholds so a target of 0 does not
# fail on eigensolver rounding of an exactly-PSD matrix.
_SPECTRAL_SLACK = 1e-10


def rel_err(a, b) -> float:
    """max |a - b| / max(1, |a|, |b|), the comparison metric used throughout."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / denom


def fd_gradient(loss_evaluator, x, h: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    if h <= 0:
        raise DomainError("step h must be positive")
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (loss_evaluator(x + e) - loss_evaluator(x - e)) / (2.0 * h)
    if not np.all(np.isfinite(g)):
        raise NonFiniteEvaluation("finite-difference gradient is not finite")
    return g


def fd_hessian(loss_evaluator, x, h: float = FD_HESS_STEP) -> np.ndarray:
    """Central second differences of a scalar function, symmetrized."""
    if h <= 0:
        raise DomainError("step h must be positive")
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    hess = np.zeros((d, d))
    f0 = loss_evaluator(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        hess[i, i] = (
            loss_evaluator(x + 2 * ei) - 2 * f0 + loss_evaluator(x - 2 * ei)
        ) / (4.0 * h * h)
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            hess[i, j] = (
                loss_evaluator(x + ei + ej)
                - loss_evaluator(x + ei - ej)
                - loss_evaluator(x - ei + ej)
                + loss_evaluator(x - ei - ej)
            ) / (4.0 * h * h)
    hess = hess + np.triu(hess, 1).T
    if not np.all(np.isfinite(hess)):
        raise NonFiniteEvaluation("finite-difference Hessian is not finite")
    return 0.5 * (hess + hess.T)


def _check_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise AsymmetricMatrix(f"{name} must be square, got {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.T).max()) > 1e-8 * scale:
        raise AsymmetricMatrix(f"{name} is not symmetric")
    return m


@dataclass(frozen=True)
class SpectralReport:
    """Extreme eigenvalues of a symmetric matrix against a lower-bound target."""

    eigmin: float
    eigmax: float
    target_l: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "eigmin": self.eigmin,
            "eigmax": self.eigmax,
            "target_l": self.target_l,
            "passed": self.passed,
        }


def psd_check(h, l: float) -> SpectralReport:
    """Check eigmin(H) >= l, with 1e-6 relative slack on the target."""
    h = _check_symmetric(h, "H")
    eigs = np.linalg.eigvalsh(h)
    eigmin = float(eigs[0])
    eigmax = float(eigs[-1])
    slack = _SPECTRAL_SLACK * max(1.0, abs(eigmax))
    passed = eigmin >= l * (1.0 - 1e-6) - slack
    return SpectralReport(eigmin=eigmin, eigmax=eigmax, target_l=float(l), passed=passed)


def sandwich_check(lhs, mid, lo: float = 0.99, hi: float = 1.01) -> bool:
    """True iff lo * mid <= lhs <= hi * mid in the semidefinite order.

    Decided through the generalized eigenvalues of (lhs, mid), which
    requires mid to be positive definite.
    """
    lhs = _check_symmetric(lhs, "lhs")
    mid = _check_symmetric(mid, "mid")
    if lhs.shape != mid.shape:
        raise AsymmetricMatrix(f"shape mismatch: {lhs.shape} vs {mid.shape}")
    if float(np.linalg.eigvalsh(mid)[0]) <= 0.0:
        raise MidNotPD("mid must be positive definite")
    gen = scipy.linalg.eigh(lhs, mid, eigvals_only=True)
    slack = _SPECTRAL_SLACK * max(1.0, float(np.max(np.abs(gen))))
    return bool(gen[0] >= lo - slack and gen[-1] <= hi + slack)


@dataclass(frozen=True)
class LipschitzPair:
    x: np.ndarray
    y: np.ndarray
    dist: float
    ratio: float


@dataclass(frozen=True)
class LipschitzProbe:
    """Hessian-difference ratios ||H(x) - H(y)|| / ||x - y|| over sampled pairs.

    Pairs are emitted base-major: for each sampled base point and direction,
    one pair per entry of the distance ladder, so consecutive groups of
    len(distances) pairs share the same direction.
    """

    pairs: list
    max_ratio: float
    radius_r: float

    def to_dict(self) -> dict:
        return {
            "pairs": [{"dist": p.dist, "ratio": p.ratio} for p in self.pairs],
            "max_ratio": self.max_ratio,
        }


def lipschitz_probe(
    inst: ProblemInstance,
    radius_r: float,
    num_pairs: int,
    seed: int,
    distances: tuple = (1e-2, 1e-3, 1e-4),
) -> LipschitzProbe:
    """Probe local Lipschitz behavior of the Hessian map.

    Samples base points with norm <= radius_r and directions obeying
    ||A (x - y)||_inf < 0.01, then reports the Hessian-difference ratio at
    each ladder distance.  Only finiteness and cross-scale stability are
    meaningful; no absolute constant is asserted.
    """
    if radius_r <= 0:
        raise DomainError("radius_r must be positive")
    if not distances:
        raise DomainError("need at least one probe distance")
    rng = np.random.default_rng(seed)
    max_dist = max(distances)
    pairs = []
    for _ in range(num_pairs):
        for attempt in range(1001):
            if attempt == 1000:
                raise SamplingFailure(
                    "could not satisfy probe preconditions in 1000 attempts"
                )
            x = rng.standard_normal(inst.d)
            x *= rng.uniform(0.0, radius_r) / max(np.linalg.norm(x), 1e-300)
            u = rng.standard_normal(inst.d)
            norm_u = np.linalg.norm(u)
            if norm_u == 0.0:
                continue
            u /= norm_u
            if max_dist * float(np.abs(inst.a @ u).max()) >= 0.01:
                continue
            if float(np.linalg.norm(x + max_dist * u)) > radius_r:
                continue
            break
        h_x = hessian_total_at(inst, x)
        for dist in distances:
            y = x + dist * u
            h_y = hessian_total_at(inst, y)
            ratio = float(np.linalg.norm(h_x - h_y, 2)) / dist
            pairs.append(LipschitzPair(x=x, y=y, dist=float(dist), ratio=ratio))
    max_ratio = max(p.ratio for p in pairs)
    if not math.isfinite(max_ratio):
        raise NonFiniteEvaluation("Hessian-difference ratio is not finite")
    return LipschitzProbe(pairs=pairs, max_ratio=max_ratio, radius_r=float(radius_r))


def convergence_audit(trace, epsilon: float) -> bool:
    """True iff the trace reaches error <= epsilon within the step budget.

    The budget is ceil(log2(initial error / epsilon)) + 5, with slack for
    the constant-factor difference between error metrics.
    """
    errs = [rec.err_to_opt for rec in trace.iterates]
    if any(e is None for e in errs) or not errs:
        raise MissingPlantedOptimum("trace has no error-to-optimum data")
    if errs[-1] > epsilon:
        return False
    budget = math.ceil(math.log2(max(errs[0] / epsilon, 1.0))) + 5
    return trace.iterations_run <= budget


def kernel_bound(inst: ProblemInstance, probe_points) -> float:
    """Largest spectral norm of the enabled curvature kernels over probe points."""
    worst = 0.0
    for x in probe_points:
        state = make_state(inst, x)
        kernel = np.zeros((inst.n, inst.n))
        if inst.use_cent:
            kernel = kernel + b_matrix(state, inst.b)
        if inst.use_exp:
            kernel = kernel + exp_kernel(state, inst)
        worst = max(worst, float(np.linalg.norm(kernel, 2)))
    return worst


def ridge_weights(inst: ProblemInstance, level: float, probe_points) -> np.ndarray:
    """Uniform ridge weights making the total Hessian >= level * I.

    Measures the curvature-kernel bound K over the probe points and returns
    w with w_i^2 = 100 K + level / sigma_min(A)^2, which dominates the
    possibly-indefinite kernels with two orders of headroom.
    """
    if level < 0:
        raise DomainError("level must be >= 0")
    smin = float(np.linalg.svd(inst.a, compute_uv=False)[-1])
    if level > 0 and smin <= 0:
        raise DomainError("A is rank deficient; no ridge weight plants a positive level")
    k_hat = kernel_bound(inst, probe_points)
    w2 = 100.0 * k_hat + (level / smin**2 if level > 0 else 0.0)
    return np.full(inst.n, math.sqrt(w2))
