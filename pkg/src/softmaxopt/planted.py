"""Synthetic instances with a known stationary point.

The generator draws A with an exact target condition number and spectral
norm below the cap, picks an optimum x_star inside the norm ball, and sets
the target b to the prediction vector at x_star.  That choice zeroes both
the squared-residual and the cross-entropy gradients there, and the ridge
term is recentered at x_star, so the full gradient vanishes at x_star
exactly.  Ridge weights are sized by the empirical spectral recipe so the
total Hessian stays above the requested strong-convexity level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, GenerationFailure
from .model import ProblemInstance, softmax
from .verify import ridge_weights

_COND_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape, conditioning, norm cap, planted ridge level and seed."""

    n: int
    d: int
    conditioning: float = 5.0
    norm_cap_r: float = 4.0
    ridge_l: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise DomainError("n and d must be positive")
        if self.n < self.d:
            raise DomainError("planted instances need n >= d")
        if self.conditioning < 1.0:
            raise DomainError("conditioning must be >= 1")
        if self.norm_cap_r <= 0.0:
            raise DomainError("norm_cap_r must be positive")
        if self.ridge_l < 0.0:
            raise DomainError("ridge_l must be >= 0")


def _orthonormal_columns(rng, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    return q * signs


def generate_planted(spec: GeneratorSpec) -> tuple[ProblemInstance, np.ndarray]:
    """Build an instance whose total gradient is exactly zero at x_star."""
    rng = np.random.default_rng(spec.seed)
    r_cap = spec.norm_cap_r
    for _ in range(100):
        sigma_max = 0.9 * r_cap
        sigmas = np.geomspace(sigma_max, sigma_max / spec.conditioning, spec.d)
        left = _orthonormal_columns(rng, spec.n, spec.d)
        right = _orthonormal_columns(rng, spec.d, spec.d)
        a = (left * sigmas) @ right.T

        x_star = rng.standard_normal(spec.d)
        x_star *= rng.uniform(0.25, 0.75) * r_cap / max(np.linalg.norm(x_star), 1e-300)

        base = ProblemInstance(
            a=a,
            b=softmax(
                ProblemInstance(a=a, b=np.zeros(spec.n), w=np.zeros(spec.n)), x_star
            ),
            w=np.zeros(spec.n),
            x_star=x_star,
            reg_mode="centered",
        )
        if spec.ridge_l > 0.0:
            probes = [x_star] + [
                x_star + rho * _unit(rng, spec.d)
                for rho in (1e-3, 0.05, 0.2, 0.5, 1.0)
                for _ in range(2)
            ]
            w = ridge_weights(base, spec.ridge_l, probes)
            inst = ProblemInstance(
                a=a, b=base.b, w=w, x_star=x_star, reg_mode="centered"
            )
        else:
            inst = base

        measured = np.linalg.svd(a, compute_uv=False)
        cond_ok = abs(measured[0] / measured[-1] - spec.conditioning) <= _COND_TOL * spec.conditioning
        caps_ok = (
            measured[0] <= r_cap
            and np.linalg.norm(inst.b) <= r_cap
            and np.linalg.norm(x_star) <= r_cap
        )
        if cond_ok and caps_ok:
            return inst, x_star
    raise GenerationFailure(
        f"no draw met conditioning {spec.conditioning} within the norm caps in 100 tries"
    )


def _unit(rng, d: int) -> np.ndarray:
    v = rng.standard_normal(d)
    return v / max(np.linalg.norm(v), 1e-300)


def basin_start(x_star, offset: float, seed) -> np.ndarray:
    """x_star plus an offset-length random unit direction."""
    if offset < 0:
        raise DomainError("offset must be >= 0")
    x_star = np.asarray(x_star, dtype=np.float64)
    return x_star + offset * _unit(np.random.default_rng(seed), x_star.size)
