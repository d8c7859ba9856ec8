"""Barrier compositions for polytope environments.

Two layers live here: the exact nonsmooth margins (max over regions of the
min over faces and agent vertices) and their differentiable log-sum-exp
counterpart with analytic gradient and time partial.  All evaluations are
stabilized so that exponents of magnitude up to ~1e4 cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import AgentShape, PolytopeEnvironment

__all__ = [
    "CbfParams",
    "BarrierEvaluation",
    "smooth_max",
    "smooth_min",
    "margin_point",
    "margin_agent",
    "margin_field",
    "smooth_barrier",
    "barrier_field",
    "provable_buffer",
]


@dataclass(frozen=True)
class CbfParams:
    """Smoothing sharpness kappa, buffer b (subtracted as b/kappa), and the
    linear class-K gain gamma in alpha(h) = gamma * h."""

    kappa: float
    buffer: float = 0.0
    alpha_gain: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.buffer < 0:
            raise ValueError(f"buffer must be nonnegative, got {self.buffer}")
        if not self.alpha_gain > 0:
            raise ValueError(f"alpha_gain must be positive, got {self.alpha_gain}")


@dataclass
class BarrierEvaluation:
    """Smooth barrier value with its spatial gradient, time partial, and the
    exact nonsmooth margin kept alongside for diagnostics."""

    value: float
    gradient: np.ndarray
    time_partial: float
    nonsmooth_value: float


def provable_buffer(env: PolytopeEnvironment) -> float:
    """Buffer log(N_p) that makes the smooth barrier a guaranteed
    under-approximation of the nonsmooth margin."""
    return float(np.log(env.num_regions))


def smooth_max(values, kappa: float) -> float:
    """Log-sum-exp over-approximation of max: (1/kappa) ln sum exp(kappa a_i).

    Satisfies max a_i <= smooth_max(a) <= max a_i + ln(N)/kappa.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("smooth_max of an empty collection")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    top = float(values.max())
    return top + float(np.log(np.sum(np.exp(kappa * (values - top))))) / kappa


def smooth_min(values, kappa: float) -> float:
    """Log-sum-exp under-approximation of min: -(1/kappa) ln sum exp(-kappa b_i).

    Satisfies min b_i - ln(N)/kappa <= smooth_min(b) <= min b_i.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("smooth_min of an empty collection")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    bottom = float(values.min())
    return bottom - float(np.log(np.sum(np.exp(-kappa * (values - bottom))))) / kappa


def _face_values(env: PolytopeEnvironment, shape: AgentShape, center: np.ndarray,
                 t: float, with_rates: bool, frame=None):
    """Per-face, per-vertex barrier values and optionally their time rates.

    Returns (values, rates) with shape (N_w, N_v); rates is None for static
    environments or when not requested.
    """
    normals, anchors, normal_rates, anchor_rates = \
        env.frame(t) if frame is None else frame
    base = np.einsum("ij,ij->i", normals, center - anchors)
    values = base[:, None] + normals @ shape.offsets.T
    rates = None
    if with_rates and normal_rates is not None:
        rate_base = (
            np.einsum("ij,ij->i", normal_rates, center - anchors)
            - np.einsum("ij,ij->i", normals, anchor_rates)
        )
        rates = rate_base[:, None] + normal_rates @ shape.offsets.T
    return values, rates


def _region_minima(env: PolytopeEnvironment, values: np.ndarray) -> np.ndarray:
    """Exact min over faces x vertices within each region."""
    row_min = values[env._rows].min(axis=1)
    return np.minimum.reduceat(row_min, env._segments)


def margin_agent(env: PolytopeEnvironment, shape: AgentShape, center,
                 t: float = 0.0) -> float:
    """Exact nonsmooth margin: max over regions of the min over the region's
    faces and all agent vertices.

    Nonnegative values certify that the agent's convex hull lies inside the
    environment.  The max-of-mins order is essential: all vertices must sit
    in a common convex region.
    """
    center = np.asarray(center, dtype=float)
    if shape.dimension != env.dimension:
        raise ValueError(
            f"agent dimension {shape.dimension} != environment dimension "
            f"{env.dimension}")
    values, _ = _face_values(env, shape, center, t, with_rates=False)
    return float(_region_minima(env, values).max())


def margin_point(env: PolytopeEnvironment, p, t: float = 0.0) -> float:
    """Exact nonsmooth margin of a point: max over regions of the min of the
    region's face values."""
    return margin_agent(env, AgentShape.point(env.dimension), p, t)


def margin_field(env: PolytopeEnvironment, shape: AgentShape, centers,
                 t: float = 0.0) -> np.ndarray:
    """Exact nonsmooth margins over a batch of agent centers, shape (M,)."""
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != env.dimension:
        raise ValueError(f"centers must have shape (M, {env.dimension})")
    normals, anchors, _, _ = env.frame(t)
    offset_dots = normals @ shape.offsets.T
    anchor_dots = np.einsum("ij,ij->i", normals, anchors)
    base = centers @ normals.T - anchor_dots                 # (M, N_w)
    values = base[:, :, None] + offset_dots[None, :, :]
    row_min = values[:, env._rows, :].min(axis=2)
    mins = np.minimum.reduceat(row_min, env._segments, axis=1)
    return mins.max(axis=1)


def smooth_barrier(env: PolytopeEnvironment, shape: AgentShape, center,
                   t: float, params: CbfParams) -> BarrierEvaluation:
    """Differentiable barrier candidate for a polytope agent.

    The value is
        (1/kappa) * ln( sum_j ( sum_{i in I_j, k} exp(-kappa psi_ik) )^-1 )
            - buffer/kappa,
    a soft max over regions of the soft min over each region's face-vertex
    values psi_ik.  The inner sum per region is accumulated flat (faces and
    vertices together) with the region minimum factored out, and the outer
    log uses the same shift, so no exponent ever exceeds zero.

    The gradient with respect to the agent center is the convex combination
    of face normals induced by the soft weights; the time partial applies
    the identical weights to the face-value time rates.

    Returns
    -------
    BarrierEvaluation
        value, gradient (shape (p,)), time_partial, and the exact nonsmooth
        margin for diagnostics.
    """
    center = np.asarray(center, dtype=float)
    if shape.dimension != env.dimension:
        raise ValueError(
            f"agent dimension {shape.dimension} != environment dimension "
            f"{env.dimension}")
    kappa = params.kappa
    frame = env.frame(t)
    values, rates = _face_values(env, shape, center, t, with_rates=True,
                                 frame=frame)
    normals = frame[0]

    gathered = values[env._rows]                        # (R, N_v)
    row_min = gathered.min(axis=1)
    mins = np.minimum.reduceat(row_min, env._segments)  # per-region exact min
    nonsmooth = float(mins.max())

    shifted = np.exp(-kappa * (gathered - mins[env._row_region][:, None]))
    row_sums = shifted.sum(axis=1)
    region_sums = np.add.reduceat(row_sums, env._segments)   # >= 1 each
    soft_mins = mins - np.log(region_sums) / kappa

    top = soft_mins.max()
    outer = np.exp(kappa * (soft_mins - top))
    outer_total = outer.sum()                                # >= 1
    value = float(top + np.log(outer_total) / kappa - params.buffer / kappa)

    # Weights: region weight times within-region softmin weight; they sum
    # to one, so the gradient is a convex combination of face normals.
    region_weights = outer / outer_total
    row_scale = (region_weights / region_sums)[env._row_region]
    weights = row_scale[:, None] * shifted               # (R, N_v)
    gradient = weights.sum(axis=1) @ normals[env._rows]

    time_partial = 0.0
    if rates is not None:
        time_partial = float(np.sum(weights * rates[env._rows]))

    return BarrierEvaluation(value, gradient, time_partial, nonsmooth)


def barrier_field(env: PolytopeEnvironment, shape: AgentShape, centers,
                  t: float, params: CbfParams, chunk: int = 4096):
    """Smooth barrier and nonsmooth margin over a batch of agent centers.

    Vectorized value-only path for grid audits and field dumps; gradients
    are not computed.

    Parameters
    ----------
    centers : array_like, shape (M, p)
    chunk : int
        Centers processed per block, bounding peak memory.

    Returns
    -------
    (h, margin) : two arrays of shape (M,)
    """
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != env.dimension:
        raise ValueError(f"centers must have shape (M, {env.dimension})")
    kappa = params.kappa
    normals, anchors, _, _ = env.frame(t)
    offset_dots = normals @ shape.offsets.T            # (N_w, N_v)
    anchor_dots = np.einsum("ij,ij->i", normals, anchors)

    h_out = np.empty(centers.shape[0])
    margin_out = np.empty(centers.shape[0])
    for start in range(0, centers.shape[0], chunk):
        block = centers[start:start + chunk]
        base = block @ normals.T - anchor_dots         # (m, N_w)
        values = base[:, :, None] + offset_dots[None, :, :]
        gathered = values[:, env._rows, :]             # (m, R, N_v)
        row_min = gathered.min(axis=2)
        mins = np.minimum.reduceat(row_min, env._segments, axis=1)
        margin_out[start:start + chunk] = mins.max(axis=1)

        shift = mins[:, env._row_region]
        expd = np.exp(-kappa * (gathered - shift[:, :, None]))
        region_sums = np.add.reduceat(expd.sum(axis=2), env._segments, axis=1)
        soft_mins = mins - np.log(region_sums) / kappa
        top = soft_mins.max(axis=1)
        outer = np.exp(kappa * (soft_mins - top[:, None])).sum(axis=1)
        h_out[start:start + chunk] = (
            top + np.log(outer) / kappa - params.buffer / kappa
        )
    return h_out, margin_out
