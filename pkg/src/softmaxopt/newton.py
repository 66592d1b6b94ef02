"""Newton-type solver with exact and row-sampled Hessian modes.

Each step solves the symmetric positive-definite system H s = g by Cholesky
factorization and updates x <- x - s (the descent direction).  In sampled
mode the Hessian is replaced by an unbiased row-sampling estimate built from
the factored form H = C^T C, C = D(x)^{1/2} A, where D(x) is the combined
n-by-n curvature kernel: row i of C is kept independently with probability
p_i = min(1, c * ||C_i||^2 / ||C||_F^2) and rescaled by 1 / sqrt(p_i), with
the oversampling count c = ceil(10 d log(d / delta) / eps0^2).  When every
p_i saturates at 1 the estimate reproduces the exact Hessian.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .calculus import gradient_bundle, hessian_total, total_kernel
from .exceptions import (
    DomainError,
    KernelNotPSD,
    NonFiniteIterate,
    SamplingDegenerate,
    SingularHessian,
)
from .model import (
    LossBreakdown,
    ModelState,
    ProblemInstance,
    loss_cent,
    loss_exp,
    loss_reg,
    make_state,
)

MODES = ("exact", "sampled")
SAMPLE_OVERSAMPLING = 10.0


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings: target accuracy, Hessian mode and sampling knobs."""

    epsilon: float = 1e-10
    delta: float = 0.05
    mode: str = "exact"
    sample_epsilon: float = 0.1
    max_iters: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise DomainError("epsilon must be positive")
        if not 0.0 < self.delta < 0.1:
            raise DomainError("delta must lie in (0, 0.1)")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if not 0.0 < self.sample_epsilon <= 0.1:
            raise DomainError("sample_epsilon must lie in (0, 0.1]")
        if self.max_iters < 0:
            raise DomainError("max_iters must be >= 0")


@dataclass(frozen=True)
class IterateRecord:
    t: int
    x: np.ndarray
    loss: float
    grad_norm: float
    err_to_opt: float | None
    step_seconds: float


@dataclass
class SolveTrace:
    """Per-iteration records plus the final convergence verdict."""

    iterates: list = field(default_factory=list)
    converged: bool = False
    iterations_run: int = 0
    max_iters_exceeded: bool = False

    def losses(self) -> np.ndarray:
        return np.array([rec.loss for rec in self.iterates])

    def loss_monotone(self) -> bool:
        losses = self.losses()
        return bool(np.all(np.diff(losses) <= 1e-12 * np.maximum(1.0, np.abs(losses[:-1]))))

    def write_csv(self, path, include_timings: bool = False) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv(include_timings=include_timings))

    def to_csv(self, include_timings: bool = False) -> str:
        """CSV text with header t,loss,grad_norm,err_to_opt,step_seconds.

        Absent values serialize as empty fields.  Wall-clock step timings are
        omitted unless asked for, keeping fixed-seed outputs byte-identical.
        """
        lines = ["t,loss,grad_norm,err_to_opt,step_seconds"]
        for rec in self.iterates:
            err = "" if rec.err_to_opt is None else repr(float(rec.err_to_opt))
            secs = repr(float(rec.step_seconds)) if include_timings else ""
            lines.append(
                f"{rec.t},{float(rec.loss)!r},{float(rec.grad_norm)!r},{err},{secs}"
            )
        return "\n".join(lines) + "\n"


def _loss_from_state(inst: ProblemInstance, state: ModelState) -> LossBreakdown:
    l_exp = loss_exp(state.f, inst.b) if inst.use_exp else 0.0
    l_cent = loss_cent(state.f, inst.b) if inst.use_cent else 0.0
    return LossBreakdown(l_exp=l_exp, l_cent=l_cent, l_reg=loss_reg(inst, state.x))


def _state_or_nonfinite(inst: ProblemInstance, x) -> ModelState:
    try:
        return make_state(inst, x)
    except OverflowError as exc:
        raise NonFiniteIterate(f"iterate escaped the representable range: {exc}") from exc


def approx_hessian(
    inst: ProblemInstance,
    state: ModelState,
    sample_epsilon: float,
    seed,
    delta: float = 0.05,
) -> np.ndarray:
    """Row-sampled spectral approximation of the total Hessian.

    Satisfies (1 - eps0) H <= H_approx <= (1 + eps0) H with probability at
    least 1 - delta for the conservative sample count used here.  ``seed``
    may be an integer or a numpy Generator.
    """
    if not 0.0 < sample_epsilon < 1.0:
        raise DomainError("sample_epsilon must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    n, d = inst.n, inst.d
    if d > n:
        raise SamplingDegenerate(f"d = {d} exceeds n = {n}; kernel rank cannot reach d")
    kernel = total_kernel(state, inst)
    evals, vecs = np.linalg.eigh(kernel)
    top = max(1.0, float(evals[-1]))
    if evals[0] < -1e-8 * top:
        raise KernelNotPSD(
            f"curvature kernel has eigenvalue {evals[0]:.3g}; row sampling needs a PSD kernel"
        )
    evals = np.clip(evals, 0.0, None)
    sqrt_kernel = (vecs * np.sqrt(evals)) @ vecs.T
    c_mat = sqrt_kernel @ inst.a
    row2 = np.einsum("ij,ij->i", c_mat, c_mat)
    total = float(row2.sum())
    if total <= 0.0:
        raise SamplingDegenerate("all rows of the factored Hessian are zero")
    count = math.ceil(SAMPLE_OVERSAMPLING * d * math.log(d / delta) / sample_epsilon**2)
    probs = np.minimum(1.0, count * row2 / total)
    rng = np.random.default_rng(seed)
    keep = rng.random(n) < probs
    if not keep.any():
        raise SamplingDegenerate("no rows survived sampling")
    scaled = c_mat[keep] / np.sqrt(probs[keep])[:, None]
    approx = scaled.T @ scaled
    evs = np.linalg.eigvalsh(approx)
    if evs[-1] <= 0.0 or evs[0] < 1e-12 * evs[-1]:
        raise SamplingDegenerate("sampled row set has rank below d")
    return approx


def _hessian_for_step(inst, state, mode, sample_epsilon, delta, seed):
    if mode == "sampled":
        return approx_hessian(inst, state, sample_epsilon, seed, delta=delta)
    return hessian_total(state, inst).h_total


def _spd_solve(hess: np.ndarray, g: np.ndarray) -> np.ndarray:
    evs = np.linalg.eigvalsh(hess)
    scale = float(np.max(np.abs(evs)))
    if scale == 0.0 or evs[0] < 1e-12 * scale:
        raise SingularHessian(
            f"Hessian eigmin {evs[0]:.3g} below tolerance {1e-12 * scale:.3g}"
        )
    try:
        factor = scipy.linalg.cho_factor(hess)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by eig check
        raise SingularHessian(str(exc)) from exc
    return scipy.linalg.cho_solve(factor, g)


def newton_step(
    inst: ProblemInstance,
    x_t,
    mode: str = "exact",
    sample_epsilon: float = 0.1,
    delta: float = 0.05,
    seed=None,
) -> np.ndarray:
    """One Newton update x - H^{-1} grad, by SPD factorization."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    state = _state_or_nonfinite(inst, x_t)
    g = gradient_bundle(state, inst).g_total
    hess = _hessian_for_step(inst, state, mode, sample_epsilon, delta, seed)
    x_next = state.x - _spd_solve(hess, g)
    if not np.all(np.isfinite(x_next)):
        raise NonFiniteIterate("Newton step produced NaN or Inf")
    return x_next


def solve(inst: ProblemInstance, x0, cfg: SolverConfig) -> SolveTrace:
    """Iterate Newton steps until convergence or the iteration cap.

    Stops when the planted error ||x - x_star|| reaches cfg.epsilon (when the
    instance carries a planted optimum) or when ||grad|| falls below
    cfg.epsilon times the current smallest Hessian eigenvalue.  Hitting
    cfg.max_iters sets a flag on the trace rather than raising.
    """
    x = np.array(x0, dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    trace = SolveTrace()
    step_seconds = 0.0
    steps = 0
    for t in range(cfg.max_iters + 1):
        state = _state_or_nonfinite(inst, x)
        losses = _loss_from_state(inst, state)
        g = gradient_bundle(state, inst).g_total
        grad_norm = float(np.linalg.norm(g))
        err = (
            float(np.linalg.norm(x - inst.x_star)) if inst.x_star is not None else None
        )
        trace.iterates.append(
            IterateRecord(
                t=t,
                x=x.copy(),
                loss=losses.total,
                grad_norm=grad_norm,
                err_to_opt=err,
                step_seconds=step_seconds,
            )
        )
        if err is not None and err <= cfg.epsilon:
            trace.converged = True
            break
        if t == cfg.max_iters:
            break
        tic = time.perf_counter()
        hess = _hessian_for_step(inst, state, cfg.mode, cfg.sample_epsilon, cfg.delta, rng)
        eigmin = float(np.linalg.eigvalsh(hess)[0])
        if grad_norm <= cfg.epsilon * max(eigmin, 0.0):
            trace.converged = True
            break
        x = state.x - _spd_solve(hess, g)
        if not np.all(np.isfinite(x)):
            raise NonFiniteIterate("Newton step produced NaN or Inf")
        step_seconds = time.perf_counter() - tic
        steps += 1
    trace.iterations_run = steps
    trace.max_iters_exceeded = not trace.converged and steps == cfg.max_iters
    return trace


def gradient_descent_baseline(
    inst: ProblemInstance,
    x0,
    step_size: float,
    iters: int,
    epsilon: float | None = None,
) -> SolveTrace:
    """Plain fixed-step gradient descent with the same trace schema.

    Used as the first-order reference in solver comparisons.  When epsilon
    is given, stops early once the planted error (or, without a planted
    optimum, the gradient norm) falls below it.
    """
    if step_size <= 0:
        raise DomainError("step_size must be positive")
    if iters < 0:
        raise DomainError("iters must be >= 0")
    x = np.array(x0, dtype=np.float64)
    trace = SolveTrace()
    step_seconds = 0.0
    steps = 0
    for t in range(iters + 1):
        state = _state_or_nonfinite(inst, x)
        losses = _loss_from_state(inst, state)
        g = gradient_bundle(state, inst).g_total
        grad_norm = float(np.linalg.norm(g))
        err = (
            float(np.linalg.norm(x - inst.x_star)) if inst.x_star is not None else None
        )
        trace.iterates.append(
            IterateRecord(
                t=t,
                x=x.copy(),
                loss=losses.total,
                grad_norm=grad_norm,
                err_to_opt=err,
                step_seconds=step_seconds,
            )
        )
        if epsilon is not None:
            reached = err <= epsilon if err is not None else grad_norm <= epsilon
            if reached:
                trace.converged = True
                break
        if t == iters:
            break
        tic = time.perf_counter()
        x = state.x - step_size * g
        if not np.all(np.isfinite(x)):
            raise NonFiniteIterate("gradient step produced NaN or Inf")
        step_seconds = time.perf_counter() - tic
        steps += 1
    trace.iterations_run = steps
    trace.max_iters_exceeded = not trace.converged and steps == iters
    return trace
