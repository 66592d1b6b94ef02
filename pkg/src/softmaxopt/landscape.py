"""2D loss surfaces over a plane in parameter space.

The plane is spanned by two orthonormal directions, by default the top two
right singular vectors of A, evaluated on a square grid of offsets around a
center point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, DomainError
from .model import LossBreakdown, ProblemInstance, loss_total

_ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class LandscapeGrid:
    """Loss values on a resolution-by-resolution grid around ``center``."""

    center: np.ndarray
    dir_u: np.ndarray
    dir_v: np.ndarray
    half_width: float
    resolution: int
    values: tuple  # values[i][j] is the LossBreakdown at offset (u_i, v_j)

    def offsets(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.resolution)

    def rows(self):
        """Yield (u, v, LossBreakdown) row-major, matching the CSV layout."""
        offs = self.offsets()
        for i, u in enumerate(offs):
            for j, v in enumerate(offs):
                yield float(u), float(v), self.values[i][j]

    def to_csv(self) -> str:
        lines = ["u,v,l_exp,l_cent,l_reg,total"]
        for u, v, cell in self.rows():
            lines.append(
                f"{u!r},{v!r},{cell.l_exp!r},{cell.l_cent!r},{cell.l_reg!r},{cell.total!r}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def average_grids(grids) -> LandscapeGrid:
    """Cell-wise mean of several grids sharing one offset layout.

    Each grid keeps its own center and directions (they are instance
    specific); the averaged surface is reported in the first grid's frame.
    """
    grids = list(grids)
    if not grids:
        raise DomainError("need at least one grid to average")
    first = grids[0]
    for g in grids[1:]:
        if g.resolution != first.resolution or g.half_width != first.half_width:
            raise DimensionMismatch("grids must share resolution and half_width")
    res = first.resolution
    values = tuple(
        tuple(
            LossBreakdown(
                l_exp=float(np.mean([g.values[i][j].l_exp for g in grids])),
                l_cent=float(np.mean([g.values[i][j].l_cent for g in grids])),
                l_reg=float(np.mean([g.values[i][j].l_reg for g in grids])),
            )
            for j in range(res)
        )
        for i in range(res)
    )
    return LandscapeGrid(
        center=first.center,
        dir_u=first.dir_u,
        dir_v=first.dir_v,
        half_width=first.half_width,
        resolution=res,
        values=values,
    )


def default_directions(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """Top two right singular vectors of A."""
    if inst.d < 2:
        raise DomainError("a 2D landscape needs d >= 2")
    _, _, vt = np.linalg.svd(inst.a)
    return vt[0], vt[1]


def landscape_grid(
    inst: ProblemInstance,
    center=None,
    dir_u=None,
    dir_v=None,
    half_width: float = 1.0,
    resolution: int = 21,
) -> LandscapeGrid:
    """Evaluate all loss terms over the grid; directions must be orthonormal."""
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    if half_width < 0:
        raise DomainError("half_width must be >= 0")
    if center is None:
        center = inst.x_star if inst.x_star is not None else np.zeros(inst.d)
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (inst.d,):
        raise DimensionMismatch(f"center must have length {inst.d}")
    if dir_u is None or dir_v is None:
        if dir_u is not None or dir_v is not None:
            raise DomainError("supply both directions or neither")
        dir_u, dir_v = default_directions(inst)
    dir_u = np.asarray(dir_u, dtype=np.float64)
    dir_v = np.asarray(dir_v, dtype=np.float64)
    for name, vec in (("dir_u", dir_u), ("dir_v", dir_v)):
        if vec.shape != (inst.d,):
            raise DimensionMismatch(f"{name} must have length {inst.d}")
        if abs(np.linalg.norm(vec) - 1.0) > _ORTHO_TOL:
            raise DomainError(f"{name} must have unit norm")
    if abs(float(dir_u @ dir_v)) > _ORTHO_TOL:
        raise DomainError("directions must be orthogonal")

    offs = np.linspace(-half_width, half_width, resolution)
    values = tuple(
        tuple(loss_total(inst, center + u * dir_u + v * dir_v) for v in offs)
        for u in offs
    )
    return LandscapeGrid(
        center=center,
        dir_u=dir_u,
        dir_v=dir_v,
        half_width=float(half_width),
        resolution=int(resolution),
        values=values,
    )
