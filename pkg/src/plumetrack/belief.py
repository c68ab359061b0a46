"""Categorical grid belief over the source cell, and its measurement update.

The belief assigns a probability p(g_i) to every cell g_i of containing the
source. Each binarized sonde reading z produces a likelihood field over the
cells, built from a Gaussian kernel on angular deviation:

* detection (z = 1): the source sits upwind, so a cell is weighted by the
  angle between the direction from the cell to the vehicle and the wave
  direction, with variance sigma2_hit;
* miss (z = 0): the source is more plausible towards the last detection, so
  a cell is weighted by the angle between the direction from the vehicle to
  the cell and the direction to the last above-threshold reading, with
  variance sigma2_miss. Before any detection a miss carries no information.

The kernel only covers a square neighbourhood of the vehicle's cell; every
cell outside it inherits the weight of the nearest covered cell. Posterior
updates are plain Bayes products followed by normalization.
"""

from dataclasses import dataclass

import numpy as np

from .grid import GridGeometry


class DegenerateUpdateError(Exception):
    """The likelihood annihilated the prior (zero posterior mass)."""


@dataclass(frozen=True)
class MeasurementContext:
    """Everything the likelihood kernels need about the current measurement.

    v_hat must be a unit vector. last_hit_pos is the world position of the
    most recent above-threshold reading, or None before the first detection.
    """

    usv_pos: tuple[float, float]
    v_hat: tuple[float, float]
    last_hit_pos: tuple[float, float] | None = None
    sigma2_hit: float = 1.0
    sigma2_miss: float = 4.0
    local_radius_cells: int = 5

    def __post_init__(self):
        if self.sigma2_hit <= 0 or self.sigma2_miss <= 0:
            raise ValueError("kernel variances must be positive")
        norm = float(np.hypot(*self.v_hat))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"v_hat must be a unit vector, |v_hat| = {norm}")
        if self.local_radius_cells < 0:
            raise ValueError("local_radius_cells must be >= 0")


@dataclass
class GridBelief:
    """Probability per cell that it contains the source, shape (ny, nx)."""

    geometry: GridGeometry
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (self.geometry.ny, self.geometry.nx):
            raise ValueError(
                f"probs shape {self.probs.shape} does not match grid "
                f"({self.geometry.ny}, {self.geometry.nx})"
            )
        if self.probs.min() < 0:
            raise ValueError("belief probabilities must be non-negative")
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"belief must sum to 1 within 1e-9, got {total}")
        self.probs.setflags(write=False)


@dataclass
class LikelihoodField:
    """Non-negative per-cell measurement likelihood, shape (ny, nx)."""

    geometry: GridGeometry
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.geometry.ny, self.geometry.nx):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match grid "
                f"({self.geometry.ny}, {self.geometry.nx})"
            )
        if self.weights.min() < 0:
            raise ValueError("likelihood weights must be non-negative")
        if not self.weights.max() > 0:
            raise ValueError("likelihood must have at least one positive weight")
        self.weights.setflags(write=False)


def uniform_belief(geometry: GridGeometry) -> GridBelief:
    return GridBelief(geometry, np.full((geometry.ny, geometry.nx), 1.0 / geometry.k))


def point_estimate(belief: GridBelief) -> tuple[float, float]:
    """Expectation of the cell-centre coordinates under the belief."""
    X, Y = belief.geometry.cell_centers()
    return float(np.sum(X * belief.probs)), float(np.sum(Y * belief.probs))


def angle_between(ux, uy, wx, wy):
    """Unsigned angle in [0, pi] between vectors (ux, uy) and (wx, wy).

    Scale invariant; the degenerate zero-vector case maps to angle 0.
    """
    cross = ux * wy - uy * wx
    dot = ux * wx + uy * wy
    return np.arctan2(np.abs(cross), dot)


def _covered_block(geometry: GridGeometry, usv_cell, radius):
    ci, cj = usv_cell
    ilo, ihi = max(ci - radius, 0), min(ci + radius, geometry.nx - 1)
    jlo, jhi = max(cj - radius, 0), min(cj + radius, geometry.ny - 1)
    return ilo, ihi, jlo, jhi


def _extend_from_block(geometry: GridGeometry, weights, block):
    """Give every uncovered cell the weight of its nearest covered cell.

    The covered set is an axis-aligned block, so the Euclidean-nearest
    covered cell is the componentwise index clamp into the block.
    """
    ilo, ihi, jlo, jhi = block
    rows = np.clip(np.arange(geometry.ny), jlo, jhi)
    cols = np.clip(np.arange(geometry.nx), ilo, ihi)
    return weights[np.ix_(rows, cols)]


def detection_likelihood(ctx: MeasurementContext, geometry: GridGeometry) -> LikelihoodField:
    """Likelihood field for an above-threshold reading at ctx.usv_pos.

    Covered cells get exp(-theta^2 / (2 * sigma2_hit)) where theta is the
    angle between the cell-to-vehicle direction and v_hat; the vehicle's own
    cell gets the kernel maximum (a detection right at the source is fully
    consistent).
    """
    X, Y = geometry.cell_centers()
    theta = angle_between(ctx.usv_pos[0] - X, ctx.usv_pos[1] - Y, *ctx.v_hat)
    w = np.exp(-(theta**2) / (2.0 * ctx.sigma2_hit))
    ui, uj = geometry.cell_of(ctx.usv_pos)
    w[uj, ui] = 1.0
    block = _covered_block(geometry, (ui, uj), ctx.local_radius_cells)
    return LikelihoodField(geometry, _extend_from_block(geometry, w, block))


def miss_likelihood(ctx: MeasurementContext, geometry: GridGeometry) -> LikelihoodField:
    """Likelihood field for a below-threshold reading at ctx.usv_pos.

    Uninformative (all equal) before the first detection. Otherwise covered
    cells get exp(-phi^2 / (2 * sigma2_miss)) where phi is the angle between
    the vehicle-to-cell direction and the direction towards the last hit; the
    vehicle's own cell takes the minimum covered weight, since a miss argues
    against the source being underfoot.
    """
    ones = np.ones((geometry.ny, geometry.nx))
    if ctx.last_hit_pos is None:
        return LikelihoodField(geometry, ones)
    rx = ctx.last_hit_pos[0] - ctx.usv_pos[0]
    ry = ctx.last_hit_pos[1] - ctx.usv_pos[1]
    if np.hypot(rx, ry) < 1e-12 * geometry.h:
        # last hit was taken at the current position: no usable direction
        return LikelihoodField(geometry, ones)
    X, Y = geometry.cell_centers()
    phi = angle_between(X - ctx.usv_pos[0], Y - ctx.usv_pos[1], rx, ry)
    w = np.exp(-(phi**2) / (2.0 * ctx.sigma2_miss))
    ui, uj = geometry.cell_of(ctx.usv_pos)
    block = _covered_block(geometry, (ui, uj), ctx.local_radius_cells)
    ilo, ihi, jlo, jhi = block
    w[uj, ui] = w[jlo : jhi + 1, ilo : ihi + 1].min()
    return LikelihoodField(geometry, _extend_from_block(geometry, w, block))


def bayes_update(belief: GridBelief, like: LikelihoodField) -> GridBelief:
    """Posterior proportional to prior times likelihood, renormalized."""
    if belief.geometry != like.geometry:
        raise ValueError("belief and likelihood must share one grid geometry")
    post = belief.probs * like.weights
    total = float(post.sum())
    if total <= 0.0:
        raise DegenerateUpdateError("likelihood leaves zero posterior mass")
    return GridBelief(belief.geometry, post / total)
