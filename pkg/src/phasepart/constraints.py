"""Projections onto the admissible set: partition of unity, mass, and box.

The partition and mass constraints are affine, so their Euclidean
projections are closed-form node shifts.  In the unweighted partition
case applying the partition projection and then the mass projection lands
exactly on the intersection (the mass shifts sum to zero, preserving the
partition); with a density weight the two are alternated.  Box
feasibility is handled separately by clipping.
"""

from __future__ import annotations

import warnings
from typing import Optional

import numpy as np

from .grid import Field, integrate_values
from .energy import PhaseSystem

PROJECTION_TOL = 1e-10
_SWEEP_CAP = 500


def clip_unit(sys: PhaseSystem) -> PhaseSystem:
    """Truncate every phase to [0, 1]; never increases the energy for wells
    that grow monotonically outside the unit interval."""
    return sys.replace_u(np.clip(sys.u, 0.0, 1.0))


def project_partition(sys: PhaseSystem) -> PhaseSystem:
    """Euclidean projection onto {sum_i u_i(x) = 1} at every free node."""
    if sys.n < 2:
        raise ValueError("partition projection needs at least two phases")
    u = sys.u.copy()
    _partition_inplace(u, sys.free(), sys.n)
    return sys.replace_u(u)


def _partition_inplace(u: np.ndarray, free: np.ndarray, n: int) -> None:
    excess = (np.sum(u, axis=0) - 1.0) / n
    u -= np.where(free, excess, 0.0)[None, :, :]


def project_mass(sys: PhaseSystem, weight: Optional[Field] = None) -> PhaseSystem:
    """Euclidean projection onto the per-phase (possibly weighted) mass targets.

    Unweighted: u_i += (a_i - I[u_i]) / |D|, a constant shift on free nodes.
    Weighted:   u_i += lambda_i * nu with lambda_i = (a_i - I[u_i nu]) / I[nu^2].
    """
    u = sys.u.copy()
    _mass_inplace(u, sys, weight)
    return sys.replace_u(u)


def _mass_inplace(u: np.ndarray, sys: PhaseSystem, weight: Optional[Field]) -> None:
    grid = sys.grid
    free = sys.free()
    cell = grid.cell_area
    if weight is None:
        denom = cell * np.count_nonzero(free)
        for i in range(sys.n):
            m = cell * float(np.sum(u[i], where=free))
            u[i] += np.where(free, (sys.targets[i] - m) / denom, 0.0)
    else:
        nu = weight.values
        denom = cell * float(np.sum(nu * nu, where=free))
        if denom == 0.0:
            raise ValueError("weighted mass projection needs integrate(nu^2) > 0")
        shift = np.where(free, nu, 0.0)
        for i in range(sys.n):
            m = cell * float(np.sum(u[i] * nu, where=free))
            u[i] += ((sys.targets[i] - m) / denom) * shift


def partition_residual(sys: PhaseSystem) -> float:
    """Max-node |sum_i u_i - 1| over free nodes (0 for single-phase systems)."""
    if not sys.partition:
        return 0.0
    err = np.abs(np.sum(sys.u, axis=0) - 1.0)
    return float(err.max(where=sys.free(), initial=0.0))


def mass_residual(sys: PhaseSystem, weight: Optional[Field] = None) -> float:
    """Max over phases of the (weighted) mass error, relative to the target scale."""
    cell = sys.grid.cell_area
    free = sys.free()
    nu = weight.values if weight is not None else None
    worst = 0.0
    for i in range(sys.n):
        if nu is None:
            m = cell * float(np.sum(sys.u[i], where=free))
        else:
            m = cell * float(np.sum(sys.u[i] * nu, where=free))
        scale = max(abs(float(sys.targets[i])), 1.0)
        worst = max(worst, abs(m - float(sys.targets[i])) / scale)
    return worst


def project_admissible(sys: PhaseSystem, weight: Optional[Field] = None) -> PhaseSystem:
    """Project onto the full admissible set X.

    Single-phase: mass projection only.  Unweighted partition: partition
    then mass, which is exact in one pass of each.  Weighted partition:
    alternate the two projections until both residuals drop below 1e-10
    (they are affine, so this converges linearly); warns on
    non-convergence instead of raising.
    """
    u = sys.u.copy()
    free = sys.free()
    if not sys.partition:
        _mass_inplace(u, sys, weight)
        return sys.replace_u(u)
    if sys.partition:
        total = sys.grid.domain_area if weight is None else \
            sys.grid.cell_area * float(np.sum(weight.values, where=free))
        if abs(float(sys.targets.sum()) - total) > 1e-9 * max(abs(total), 1.0):
            raise ValueError(
                f"partition targets sum to {float(sys.targets.sum()):.12g} "
                f"but the domain mass is {total:.12g}")
    if weight is None:
        _partition_inplace(u, free, sys.n)
        _mass_inplace(u, sys, weight)
        return sys.replace_u(u)
    out = sys.replace_u(u)
    for _ in range(_SWEEP_CAP):
        u = out.u
        _partition_inplace(u, free, sys.n)
        _mass_inplace(u, out, weight)
        if partition_residual(out) < PROJECTION_TOL and mass_residual(out, weight) < PROJECTION_TOL:
            return out
    warnings.warn("alternating partition/mass projection did not reach 1e-10 in "
                  f"{_SWEEP_CAP} sweeps", RuntimeWarning)
    return out


def make_feasible(sys: PhaseSystem, weight: Optional[Field] = None,
                  tol: float = 1e-12, max_sweeps: int = 200) -> PhaseSystem:
    """Alternate box clipping with the admissible projection until the
    pre-clip constraint residuals vanish.

    A single clip-then-project pass leaves the plateau nodes slightly
    outside [0, 1] (the mass shift moves every free node), and that fixed
    offset stalls a descent line search; iterating the pair removes it.
    """
    out = sys.replace_u(sys.u.copy())
    u = out.u
    free = out.free()
    for _ in range(max_sweeps):
        np.clip(u, 0.0, 1.0, out=u)
        if out.partition:
            _partition_inplace(u, free, out.n)
        _mass_inplace(u, out, weight)
        clipped = np.clip(u, 0.0, 1.0)
        box_err = float(np.abs(clipped - u).max())
        if box_err < tol:
            break
    return out
