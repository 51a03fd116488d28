"""1D optimal interface profile and the recovery-style warm start.

The minimal transition v between the wells at scale z solves
v' = sqrt(W(v)) / z with v(0) = 1/2, and realizes the 1D interface energy
z * c_W.  For the default quartic well the solution is the logistic
1 / (1 + exp(-t/z)); for other wells the profile is integrated once by
RK4 at z = 1 and rescaled (v_z(t) = v_1(t/z)).

The eta-truncation v^eta = clip((1 + 2 eta) v - eta, 0, 1) makes the
transition exactly flat outside a finite support, which is what the
recovery initializer composes with a signed distance to turn a label
image into a feasible near-optimal phase system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .anisotropy import Anisotropy
from .constraints import make_feasible
from .energy import DoubleWell, PhaseSystem
from .grid import Field, Grid, Labels, PERIODIC, integrate_values


_RK4_SPAN = 60.0   # table half-width at z = 1; tails are within 1e-12 of the wells
_RK4_STEP = 0.01   # z/100 at z = 1


def _rk4_table(well: DoubleWell) -> tuple[np.ndarray, np.ndarray]:
    """Integrate v' = sqrt(W(v)) at z = 1 from v(0) = 1/2, both directions."""
    def f(v):
        return math.sqrt(max(well.w(v), 0.0))

    n = int(round(_RK4_SPAN / _RK4_STEP))
    ts = np.arange(-n, n + 1) * _RK4_STEP
    vs = np.empty(2 * n + 1)
    vs[n] = 0.5
    v = 0.5
    for k in range(n):  # forward
        hstep = _RK4_STEP
        k1 = f(v)
        k2 = f(v + 0.5 * hstep * k1)
        k3 = f(v + 0.5 * hstep * k2)
        k4 = f(v + hstep * k3)
        v = min(v + (hstep / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), 1.0)
        vs[n + 1 + k] = v
    v = 0.5
    for k in range(n):  # backward (v decreases toward 0)
        hstep = -_RK4_STEP
        k1 = f(v)
        k2 = f(v + 0.5 * hstep * k1)
        k3 = f(v + 0.5 * hstep * k2)
        k4 = f(v + hstep * k3)
        v = max(v + (hstep / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), 0.0)
        vs[n - 1 - k] = v
    return ts, vs


@dataclass
class Profile:
    """Optimal transition profile at anisotropy scale z with eta-truncation."""

    z: float
    eta: float = 0.0
    well: Optional[DoubleWell] = None

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError("profile scale z must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.well is None:
            self.well = DoubleWell.default()
        self._closed_form = self.well.w is DoubleWell.default().w
        self._table = None

    def _base(self, s: np.ndarray) -> np.ndarray:
        """Untruncated profile at z = 1 evaluated at s = t / z."""
        if self._closed_form:
            return 1.0 / (1.0 + np.exp(-np.clip(s, -500.0, 500.0)))
        if self._table is None:
            self._table = _rk4_table(self.well)
        ts, vs = self._table
        return np.interp(s, ts, vs)

    def value(self, t) -> np.ndarray:
        """v^eta(t); goes from 0 to 1 with v(0) = 1/2 when eta = 0."""
        v = self._base(np.asarray(t, dtype=float) / self.z)
        if self.eta == 0.0:
            return v
        return np.clip((1.0 + 2.0 * self.eta) * v - self.eta, 0.0, 1.0)

    def derivative(self, t) -> np.ndarray:
        """(v^eta)'(t), using v' = sqrt(W(v)) / z on the untruncated region."""
        t = np.asarray(t, dtype=float)
        v = self._base(t / self.z)
        dv = np.sqrt(np.maximum(self.well.w(v), 0.0)) / self.z
        if self.eta == 0.0:
            return dv
        w = (1.0 + 2.0 * self.eta) * v - self.eta
        inside = (w > 0.0) & (w < 1.0)
        return np.where(inside, (1.0 + 2.0 * self.eta) * dv, 0.0)

    def support_bound(self) -> float:
        """T with (v^eta)' supported in [-T z, T z] (finite for eta > 0)."""
        if self.eta == 0.0:
            return math.inf
        return math.log((1.0 + self.eta) / self.eta)


def profile_value(p: Profile, t) -> np.ndarray:
    return p.value(t)


def profile_energy_1d(p: Profile) -> float:
    """int over R of W(v^eta) + z^2 ((v^eta)')^2 by composite Simpson.

    Over [-50 z, 50 z]; equals z * c_W at eta = 0 and decreases to it as
    eta -> 0 from above.
    """
    half = 50.0 * p.z
    n = 20000  # even interval count for Simpson
    ts = np.linspace(-half, half, n + 1)
    v = p.value(ts)
    dv = p.derivative(ts)
    f = p.well.w(v) + (p.z * p.z) * dv * dv
    hstep = (2.0 * half) / n
    return float((hstep / 3.0) * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum()))


def _distance_to_set(member: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    """Euclidean node-center distance to the nearest node of a boolean set."""
    if not member.any():
        raise ValueError("distance to an empty node set")
    if periodic:
        tiled = np.tile(member, (3, 3))
        d = ndimage.distance_transform_edt(~tiled, sampling=h)
        nx, ny = member.shape
        return d[nx:2 * nx, ny:2 * ny]
    return ndimage.distance_transform_edt(~member, sampling=h)


def signed_distance(labels: Labels, phase: int) -> Field:
    """Signed node-center distance: positive inside the phase, negative outside.

    When the phase covers the whole domain the positive part falls back to
    the distance to the domain boundary (nearest masked node, or the
    rectangle edge on mask-free grids).
    """
    grid = labels.grid
    ins = grid.inside()
    periodic = grid.boundary == PERIODIC
    inside_phase = ins & (labels.values == phase)
    if not inside_phase.any():
        raise ValueError(f"phase {phase} is absent from the labels")
    complement = ins & (labels.values != phase)
    h = grid.h

    d_in = _distance_to_set(inside_phase, h, periodic)   # 0 on the phase
    if complement.any():
        d_out = _distance_to_set(complement, h, periodic)  # 0 off the phase
    elif grid.mask is not None:
        d_out = _distance_to_set(~grid.mask, h, periodic)
    else:
        X, Y = grid.meshgrid()
        wx = (grid.nx - 1) * h
        wy = (grid.ny - 1) * h
        d_out = np.minimum.reduce([X, wx - X, Y, wy - Y])
    return Field(grid, d_out - d_in)


def _distance_normals(grid: Grid, d: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Central-difference direction of the signed distance plus a degeneracy flag."""
    h = grid.h
    gx = np.empty_like(d)
    gy = np.empty_like(d)
    gx[1:-1, :] = (d[2:, :] - d[:-2, :]) / (2 * h)
    gx[0, :] = (d[1, :] - d[0, :]) / h
    gx[-1, :] = (d[-1, :] - d[-2, :]) / h
    gy[:, 1:-1] = (d[:, 2:] - d[:, :-2]) / (2 * h)
    gy[:, 0] = (d[:, 1] - d[:, 0]) / h
    gy[:, -1] = (d[:, -1] - d[:, -2]) / h
    norm = np.hypot(gx, gy)
    degenerate = norm < 1e-12
    safe = np.where(degenerate, 1.0, norm)
    return gx / safe, gy / safe, degenerate


def recovery_init(labels: Labels, aniso: Anisotropy, eps: float, eta: float = 1e-3,
                  targets=None, well: Optional[DoubleWell] = None,
                  pin_boundary: bool = False) -> PhaseSystem:
    """Build a feasible near-optimal phase system from a label image.

    Each phase is the eta-truncated profile of its signed distance over
    eps, at scale z = phi(x, n) with n the unit gradient of the distance
    (falling back to the lower comparability constant where the gradient
    degenerates).  Multi-phase systems are then normalized by the phase
    sum and projected onto the admissible set.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    grid = labels.grid
    well = well or DoubleWell.default()
    n = labels.n_phases
    if n < 1:
        raise ValueError("labels carry no phases")
    X, Y = grid.meshgrid()
    ins = grid.inside()
    prof = Profile(1.0, eta, well)

    u = np.zeros((n,) + grid.shape)
    masses = np.zeros(n)
    for i in range(1, n + 1):
        d = signed_distance(labels, i).values
        n1, n2, degen = _distance_normals(grid, d)
        z = np.asarray(aniso.value(X, Y, n1, n2), dtype=float)
        z = np.where(degen | (z <= 0.0), aniso.m, z)
        u[i - 1] = prof.value(d / (eps * z))
        masses[i - 1] = integrate_values(grid, (labels.values == i) & ins)

    if n >= 2:
        total = np.sum(u, axis=0)
        u /= np.maximum(total, 1e-12)[None, :, :]
    if targets is None:
        targets = masses
    sys = PhaseSystem(grid, u, targets, eps, partition=n >= 2, pin_boundary=pin_boundary)
    return make_feasible(sys)
