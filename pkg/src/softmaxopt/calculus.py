"""Closed-form first and second derivatives of the objective.

Everything is assembled from the column derivative of the prediction vector

    df/dx_i = -<f, A_i> f + f o A_i          (o = entrywise product)

which in matrix form is ``J = P A`` with the softmax kernel
``P = diag(f) - f f^T``.  The cross-entropy Hessian is ``A^T B A`` with
``B = <1, b> P``; the squared-residual Hessian is derived by the product
rule on ``<df/dx_i, f - b>`` and is likewise expressed as ``A^T B_exp A``
for an explicit n-by-n kernel, so the total Hessian is ``A^T D A`` with
``D = B + B_exp + W^2``.  That factored form is what the row-sampling
approximation in the solver consumes.

Index arguments are 0-based columns of A.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, IndexOutOfRange, NonFiniteInput
from .model import ModelState, ProblemInstance, _vector, make_state


def _check_col(inst: ProblemInstance, i: int) -> None:
    if not 0 <= i < inst.d:
        raise IndexOutOfRange(f"column index {i} outside [0, {inst.d})")


@dataclass(frozen=True)
class GradientBundle:
    """Per-term gradients and their sum at one point."""

    g_exp: np.ndarray
    g_cent: np.ndarray
    g_reg: np.ndarray
    g_total: np.ndarray


@dataclass(frozen=True)
class HessianBundle:
    """Cross-entropy kernel plus per-term and total Hessians at one point."""

    b_kernel: np.ndarray  # n x n cross-entropy curvature kernel
    h_exp: np.ndarray
    h_cent: np.ndarray
    h_reg: np.ndarray
    h_total: np.ndarray


def grad_f_dir(state: ModelState, inst: ProblemInstance, i: int) -> np.ndarray:
    """Derivative of the prediction vector along column i: -<f, A_i> f + f o A_i."""
    _check_col(inst, i)
    f = state.f
    col = inst.a[:, i]
    return -(f @ col) * f + f * col


def grad_f_inner(state: ModelState, inst: ProblemInstance, i: int, j: int) -> float:
    """<df/dx_i, A_j> in closed form: -<f, A_i><f, A_j> + <f, A_i o A_j>."""
    _check_col(inst, i)
    _check_col(inst, j)
    f = state.f
    ci = inst.a[:, i]
    cj = inst.a[:, j]
    return float(-(f @ ci) * (f @ cj) + f @ (ci * cj))


def grad_log_f_dir(state: ModelState, inst: ProblemInstance, i: int) -> np.ndarray:
    """Derivative of log f along column i: -<f, A_i> 1 + A_i."""
    _check_col(inst, i)
    col = inst.a[:, i]
    return col - float(state.f @ col)


def grad_exp(state: ModelState, inst: ProblemInstance) -> np.ndarray:
    """Gradient of 0.5 ||f - b||^2: entry i is <df/dx_i, f - b>."""
    f = state.f
    r = f - inst.b
    return inst.a.T @ (f * r) - float(f @ r) * (inst.a.T @ f)


def grad_cent(state: ModelState, inst: ProblemInstance) -> np.ndarray:
    """Gradient of the cross-entropy term: A^T (<b, 1> f - b)."""
    b = inst.b
    return inst.a.T @ (float(b.sum()) * state.f - b)


def grad_reg(inst: ProblemInstance, x) -> np.ndarray:
    """Gradient of the ridge term: A^T W^2 A (x - x_ref)."""
    x = _vector(x, "x")
    if x.shape != (inst.d,):
        raise DimensionMismatch(f"x must have length {inst.d}")
    z = inst.a @ (x - inst.reg_center())
    return inst.a.T @ (inst.w**2 * z)


def gradient_bundle(state: ModelState, inst: ProblemInstance) -> GradientBundle:
    """All enabled per-term gradients; disabled terms contribute zero."""
    zero = np.zeros(inst.d)
    g_exp = grad_exp(state, inst) if inst.use_exp else zero
    g_cent = grad_cent(state, inst) if inst.use_cent else zero
    g_reg = grad_reg(inst, state.x)
    g_total = g_exp + g_cent + g_reg
    if not np.all(np.isfinite(g_total)):
        raise NonFiniteInput("gradient is not finite")
    return GradientBundle(g_exp=g_exp, g_cent=g_cent, g_reg=g_reg, g_total=g_total)


def grad_total(inst: ProblemInstance, x) -> np.ndarray:
    return gradient_bundle(make_state(inst, x), inst).g_total


def hessian_log_f_entry(state: ModelState, inst: ProblemInstance, i: int, j: int) -> float:
    """Common value of all coordinates of d^2 log f / dx_i dx_j.

    The second derivative of log f is a constant vector; the constant is
    <f, A_i><f, A_j> - <f, A_i o A_j>, the negated covariance of columns
    i and j under the probability weights f.
    """
    return -grad_f_inner(state, inst, i, j)


def softmax_kernel(f: np.ndarray) -> np.ndarray:
    """diag(f) - f f^T, the Jacobian kernel of the prediction map."""
    return np.diag(f) - np.outer(f, f)


def b_matrix(state: ModelState, b) -> np.ndarray:
    """Cross-entropy curvature kernel <1, b> (diag(f) - f f^T); row sums are 0."""
    b = _vector(b, "b")
    if b.shape != state.f.shape:
        raise DimensionMismatch(f"b must have length {state.f.shape[0]}")
    return float(b.sum()) * softmax_kernel(state.f)


def exp_kernel(state: ModelState, inst: ProblemInstance) -> np.ndarray:
    """n-by-n kernel B_exp with hessian of 0.5||f - b||^2 equal to A^T B_exp A.

    Sum of the Gauss-Newton part P^2 and the residual-weighted curvature of
    f itself (q = f o r, s = <f, r>):

        B_exp = P^2 + diag(q) - s diag(f) - q f^T - f q^T + 2 s f f^T
    """
    f = state.f
    r = f - inst.b
    q = f * r
    s = float(f @ r)
    p = softmax_kernel(f)
    return (
        p @ p
        + np.diag(q - s * f)
        - np.outer(q, f)
        - np.outer(f, q)
        + 2.0 * s * np.outer(f, f)
    )


def hessian_cent(state: ModelState, inst: ProblemInstance) -> np.ndarray:
    """Cross-entropy Hessian A^T B A."""
    return inst.a.T @ b_matrix(state, inst.b) @ inst.a


def hessian_exp(state: ModelState, inst: ProblemInstance) -> np.ndarray:
    """Exact Hessian of 0.5 ||f - b||^2 (validated against finite differences)."""
    return inst.a.T @ exp_kernel(state, inst) @ inst.a


def hessian_reg(inst: ProblemInstance) -> np.ndarray:
    """Ridge Hessian A^T W^2 A (independent of x)."""
    return inst.a.T @ (inst.w[:, None] ** 2 * inst.a)


def total_kernel(state: ModelState, inst: ProblemInstance) -> np.ndarray:
    """n-by-n kernel D with total Hessian A^T D A; disabled terms excluded."""
    d = np.diag(inst.w**2)
    if inst.use_cent:
        d = d + b_matrix(state, inst.b)
    if inst.use_exp:
        d = d + exp_kernel(state, inst)
    return d


def hessian_total(state: ModelState, inst: ProblemInstance) -> HessianBundle:
    """Per-term Hessians and their sum; disabled terms contribute zero."""
    zero = np.zeros((inst.d, inst.d))
    b_kernel = b_matrix(state, inst.b)
    h_cent = inst.a.T @ b_kernel @ inst.a if inst.use_cent else zero
    h_exp = hessian_exp(state, inst) if inst.use_exp else zero
    h_reg = hessian_reg(inst)
    return HessianBundle(
        b_kernel=b_kernel,
        h_exp=h_exp,
        h_cent=h_cent,
        h_reg=h_reg,
        h_total=h_exp + h_cent + h_reg,
    )


def hessian_total_at(inst: ProblemInstance, x) -> np.ndarray:
    return hessian_total(make_state(inst, x), inst).h_total
