"""Problem data model and objective evaluation.

A problem is a dense real matrix ``A`` (n rows, d columns), a target vector
``b`` (length n) and a vector of ridge weights ``w`` (length n).  The model
maps a parameter vector ``x`` to positive weights ``u = exp(A @ x)``, their
sum ``alpha`` and the normalized prediction ``f = u / alpha`` (a probability
vector).  Three loss terms are evaluated on top of that:

* squared-residual term   ``0.5 * ||f - b||^2``
* cross-entropy term      ``-<b, log f>``
* ridge term              ``0.5 * ||W A (x - x_ref)||^2`` with ``W = diag(w)``

``x_ref`` is zero for ordinary instances; planted instances recenter the
ridge term at their known optimum (``reg_mode == "centered"``) so the total
gradient vanishes there exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, DomainError, NonFiniteInput

# Largest z with exp(z) finite in float64.
MAX_EXP_ARG = float(np.log(np.finfo(np.float64).max))

REG_MODES = ("paper", "centered")


def _vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-d, got shape {arr.shape}")
    return arr


def _require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains NaN or Inf")


def hadamard(x, y) -> np.ndarray:
    """Entrywise product of two equal-length vectors."""
    x = _vector(x, "x")
    y = _vector(y, "y")
    if x.shape != y.shape:
        raise DimensionMismatch(f"hadamard: {x.shape} vs {y.shape}")
    return x * y


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One regression problem: matrix ``a``, target ``b``, ridge weights ``w``.

    ``use_exp`` / ``use_cent`` switch the squared-residual and cross-entropy
    terms on or off in the total objective; the ridge term is disabled by
    ``w = 0``.  When the cross-entropy term is enabled, ``b`` must be
    entrywise nonnegative so its curvature kernel is positive semidefinite.
    ``x_star`` carries a planted optimum when one is known, and
    ``reg_mode == "centered"`` recenters the ridge term at it.
    """

    a: np.ndarray
    b: np.ndarray
    w: np.ndarray
    use_exp: bool = True
    use_cent: bool = True
    x_star: np.ndarray | None = None
    reg_mode: str = "paper"

    def __post_init__(self):
        # copies so freezing the fields cannot alter caller-owned arrays
        a = np.array(self.a, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionMismatch(f"a must be 2-d, got shape {a.shape}")
        n, d = a.shape
        if n < 1 or d < 1:
            raise DimensionMismatch(f"a must be at least 1x1, got {a.shape}")
        b = _vector(self.b, "b").copy()
        w = _vector(self.w, "w").copy()
        if b.shape != (n,):
            raise DimensionMismatch(f"b must have length {n}, got {b.shape}")
        if w.shape != (n,):
            raise DimensionMismatch(f"w must have length {n}, got {w.shape}")
        _require_finite(a, "a")
        _require_finite(b, "b")
        _require_finite(w, "w")
        if self.use_cent and np.any(b < 0.0):
            raise DomainError(
                "b must be entrywise >= 0 while the cross-entropy term is enabled"
            )
        if self.reg_mode not in REG_MODES:
            raise DomainError(f"reg_mode must be one of {REG_MODES}")
        x_star = self.x_star
        if x_star is not None:
            x_star = _vector(x_star, "x_star").copy()
            if x_star.shape != (d,):
                raise DimensionMismatch(f"x_star must have length {d}")
            _require_finite(x_star, "x_star")
            x_star.setflags(write=False)
        elif self.reg_mode == "centered":
            raise DomainError('reg_mode "centered" requires x_star')
        for arr in (a, b, w):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "x_star", x_star)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.a.shape[1]

    def reg_center(self) -> np.ndarray:
        """Point the ridge term is centered at (zero unless recentered)."""
        if self.reg_mode == "centered":
            return self.x_star
        return np.zeros(self.d)

    def to_dict(self) -> dict:
        """JSON-ready dict: n, d, row-major A, b, w, plus optional extras."""
        out = {
            "n": self.n,
            "d": self.d,
            "A": [float(v) for v in self.a.ravel()],
            "b": [float(v) for v in self.b],
            "w": [float(v) for v in self.w],
        }
        if self.x_star is not None:
            out["x_star"] = [float(v) for v in self.x_star]
        if self.reg_mode != "paper":
            out["reg_mode"] = self.reg_mode
        if not self.use_exp:
            out["use_exp"] = False
        if not self.use_cent:
            out["use_cent"] = False
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        n = int(data["n"])
        d = int(data["d"])
        flat = np.asarray(data["A"], dtype=np.float64)
        if flat.shape != (n * d,):
            raise DimensionMismatch(
                f"A must hold n*d = {n * d} row-major entries, got {flat.size}"
            )
        return cls(
            a=flat.reshape(n, d),
            b=np.asarray(data["b"], dtype=np.float64),
            w=np.asarray(data["w"], dtype=np.float64),
            use_exp=bool(data.get("use_exp", True)),
            use_cent=bool(data.get("use_cent", True)),
            x_star=(
                np.asarray(data["x_star"], dtype=np.float64)
                if "x_star" in data
                else None
            ),
            reg_mode=str(data.get("reg_mode", "paper")),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ProblemInstance":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class ModelState:
    """Cached per-point quantities: ``x``, raw weights ``u``, their sum and ``f``."""

    x: np.ndarray
    u: np.ndarray
    alpha: float
    f: np.ndarray


def logits(inst: ProblemInstance, x) -> np.ndarray:
    """A @ x with input validation."""
    x = _vector(x, "x")
    if x.shape != (inst.d,):
        raise DimensionMismatch(f"x must have length {inst.d}, got {x.shape}")
    _require_finite(x, "x")
    return inst.a @ x


def evaluate_u(inst: ProblemInstance, x) -> np.ndarray:
    """Entrywise exponential of A @ x.

    Raises OverflowError when any entry of A @ x escapes the float64
    exponent range in either direction (exp would return Inf or exactly 0,
    both of which break the positivity of the weights).
    """
    z = logits(inst, x)
    if np.any(z > MAX_EXP_ARG):
        raise OverflowError(
            f"exp(A @ x) overflows float64 (max logit {z.max():.3g})"
        )
    u = np.exp(z)
    if np.any(u == 0.0):
        raise OverflowError(
            f"exp(A @ x) underflows to zero (min logit {z.min():.3g})"
        )
    return u


def evaluate_alpha(u) -> float:
    """Sum of the positive weights u."""
    u = _vector(u, "u")
    _require_finite(u, "u")
    if np.any(u <= 0.0):
        raise DomainError("all entries of u must be strictly positive")
    alpha = float(np.sum(u))
    if not np.isfinite(alpha):
        raise OverflowError("sum of u overflows float64")
    return alpha


def evaluate_f(u) -> np.ndarray:
    """Normalize positive weights to a probability vector u / sum(u)."""
    u = _vector(u, "u")
    alpha = evaluate_alpha(u)
    return u / alpha


def softmax(inst: ProblemInstance, x) -> np.ndarray:
    """Prediction vector computed with max-subtraction.

    Stays finite even where the raw weights exp(A @ x) would overflow,
    since the normalized output is invariant to shifting the logits.
    """
    z = logits(inst, x)
    e = np.exp(z - z.max())
    return e / e.sum()


def log_softmax(inst: ProblemInstance, x) -> np.ndarray:
    """log of the prediction vector, computed without forming exp(A @ x)."""
    z = logits(inst, x)
    zs = z - z.max()
    return zs - np.log(np.exp(zs).sum())


def make_state(inst: ProblemInstance, x) -> ModelState:
    """Evaluate and cache u, alpha and f at one parameter vector.

    f uses the shift-invariant path; u is the raw exponential and errors
    on exponent overflow.
    """
    x = _vector(x, "x").copy()
    u = evaluate_u(inst, x)
    alpha = evaluate_alpha(u)
    z = inst.a @ x
    e = np.exp(z - z.max())
    f = e / e.sum()
    for arr in (x, u, f):
        arr.setflags(write=False)
    return ModelState(x=x, u=u, alpha=alpha, f=f)


def loss_exp(f, b) -> float:
    """Squared-residual term 0.5 * ||f - b||^2."""
    f = _vector(f, "f")
    b = _vector(b, "b")
    if f.shape != b.shape:
        raise DimensionMismatch(f"loss_exp: {f.shape} vs {b.shape}")
    r = f - b
    return 0.5 * float(r @ r)


def loss_cent(f, b) -> float:
    """Cross-entropy term -<b, log f>; requires strictly positive f."""
    f = _vector(f, "f")
    b = _vector(b, "b")
    if f.shape != b.shape:
        raise DimensionMismatch(f"loss_cent: {f.shape} vs {b.shape}")
    if np.any(f <= 0.0):
        raise DomainError("loss_cent needs strictly positive f")
    return -float(b @ np.log(f))


def loss_reg(inst: ProblemInstance, x) -> float:
    """Ridge term 0.5 * ||W A (x - x_ref)||^2 with W = diag(w)."""
    x = _vector(x, "x")
    if x.shape != (inst.d,):
        raise DimensionMismatch(f"x must have length {inst.d}")
    z = inst.a @ (x - inst.reg_center())
    wz = inst.w * z
    return 0.5 * float(wz @ wz)


@dataclass(frozen=True)
class LossBreakdown:
    """Values of the three loss terms and their sum at one point."""

    l_exp: float
    l_cent: float
    l_reg: float
    total: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.total is None:
            object.__setattr__(self, "total", self.l_exp + self.l_cent + self.l_reg)


def loss_total(inst: ProblemInstance, x) -> LossBreakdown:
    """All loss terms from one shared state; disabled terms contribute 0."""
    state = make_state(inst, x)
    l_exp = loss_exp(state.f, inst.b) if inst.use_exp else 0.0
    l_cent = loss_cent(state.f, inst.b) if inst.use_cent else 0.0
    l_reg = loss_reg(inst, x)
    return LossBreakdown(l_exp=l_exp, l_cent=l_cent, l_reg=l_reg)


def residual_linear(inst: ProblemInstance, x) -> float:
    """||A x - b||_2."""
    return float(np.linalg.norm(logits(inst, x) - inst.b))


def residual_exponential(inst: ProblemInstance, x) -> float:
    """||exp(A x) - b||_2."""
    return float(np.linalg.norm(evaluate_u(inst, x) - inst.b))


def residual_rescaled(inst: ProblemInstance, x) -> float:
    """||u - <u, 1> b||_2 for u = exp(A x)."""
    u = evaluate_u(inst, x)
    return float(np.linalg.norm(u - u.sum() * inst.b))


def residual_softmax(inst: ProblemInstance, x) -> float:
    """||f - b||_2; its square is twice the squared-residual loss term."""
    return float(np.linalg.norm(softmax(inst, x) - inst.b))
