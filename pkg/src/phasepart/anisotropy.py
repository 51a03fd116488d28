"""Anisotropy catalog: position-dependent norms phi(x, xi) on gradient vectors.

Every kind evaluates phi, phi^2 and the xi-gradient of phi^2, vectorized
over numpy arrays.  Kinds built from absolute values (the l1/lp family)
are smoothed by replacing |t| with sqrt(t^2 + delta^2) - delta, which
keeps phi(x, 0) = 0 exactly and makes phi^2 continuously differentiable
for delta > 0.

Each instance reports comparability constants (m, M) with
m*|xi| - 10*delta <= phi(x, xi) <= M*|xi|, and a convexity flag
(False only for the root-of-product kind).
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .grid import Field


def _sabs(t: np.ndarray, delta: float) -> np.ndarray:
    if delta == 0.0:
        return np.abs(t)
    return np.sqrt(t * t + delta * delta) - delta


def _dsabs(t: np.ndarray, delta: float) -> np.ndarray:
    if delta == 0.0:
        out = np.sign(t)
        return out
    return t / np.sqrt(t * t + delta * delta)


class Anisotropy:
    """Base interface: value, squared value and gradient of the square.

    Positions (x, y) and gradient components (g1, g2) broadcast together;
    position-independent kinds ignore (x, y).
    """

    kind: str = "base"
    delta: float = 0.0
    convex: bool = True
    m: float = 1.0
    M: float = 1.0
    smooth: bool = True  # phi^2 differentiable at delta = 0

    def value(self, x, y, g1, g2) -> np.ndarray:
        raise NotImplementedError

    def sq(self, x, y, g1, g2) -> np.ndarray:
        v = self.value(x, y, g1, g2)
        return v * v

    def sq_grad(self, x, y, g1, g2) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def with_delta(self, delta: float) -> "Anisotropy":
        """Copy with another smoothing parameter (identity for smooth kinds)."""
        return self

    def params(self) -> dict:
        return {}

    def spec(self) -> dict:
        out = {"kind": self.kind}
        out.update(self.params())
        if not self.smooth:
            out["delta"] = self.delta
        return out

    def _require_smoothed(self):
        if not self.smooth and self.delta == 0.0:
            raise ValueError(f"{self.kind} needs delta > 0 for a differentiable squared norm")


def phi(a: Anisotropy, x: Sequence[float], xi: Sequence[float]) -> float:
    """Evaluate phi at a single point and direction."""
    return float(a.value(x[0], x[1], xi[0], xi[1]))


def phi_sq_grad(a: Anisotropy, x: Sequence[float], xi: Sequence[float]) -> np.ndarray:
    """Gradient of phi^2 in xi at a single point and direction."""
    d1, d2 = a.sq_grad(x[0], x[1], xi[0], xi[1])
    return np.array([float(d1), float(d2)])


class Euclidean(Anisotropy):
    kind = "euclidean"

    def value(self, x, y, g1, g2):
        return np.sqrt(g1 * g1 + g2 * g2)

    def sq(self, x, y, g1, g2):
        return g1 * g1 + g2 * g2

    def sq_grad(self, x, y, g1, g2):
        return 2.0 * np.asarray(g1, dtype=float), 2.0 * np.asarray(g2, dtype=float)


class Elliptic(Anisotropy):
    """phi = sqrt(a*xi1^2 + b*xi2^2); favors the axis with the smaller weight."""

    kind = "elliptic"

    def __init__(self, a: float, b: float):
        if a <= 0 or b <= 0:
            raise ValueError("elliptic coefficients must be positive")
        self.a = float(a)
        self.b = float(b)
        self.m = math.sqrt(min(a, b))
        self.M = math.sqrt(max(a, b))

    def params(self):
        return {"a": self.a, "b": self.b}

    def value(self, x, y, g1, g2):
        return np.sqrt(self.a * g1 * g1 + self.b * g2 * g2)

    def sq(self, x, y, g1, g2):
        return self.a * g1 * g1 + self.b * g2 * g2

    def sq_grad(self, x, y, g1, g2):
        return 2.0 * self.a * np.asarray(g1, dtype=float), 2.0 * self.b * np.asarray(g2, dtype=float)


class RotatedLp(Anisotropy):
    """lp norm of the coordinates rotated by theta (smoothed absolute values).

    theta = 0, p = 1 is the plain l1 norm |xi1| + |xi2|.
    """

    kind = "rotated_lp"

    def __init__(self, theta: float = 0.0, p: float = 1.0, delta: float = 1e-6):
        if p < 1:
            raise ValueError(f"lp exponent must be >= 1, got {p}")
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        self.theta = float(theta)
        self.p = float(p)
        self.delta = float(delta)
        self.smooth = p >= 2
        ratio = 2.0 ** (1.0 / p - 0.5)
        self.m = min(1.0, ratio)
        self.M = max(1.0, ratio)
        self._c = math.cos(self.theta)
        self._s = math.sin(self.theta)

    def params(self):
        return {"theta": self.theta, "p": self.p, "delta": self.delta}

    def with_delta(self, delta: float) -> "RotatedLp":
        return RotatedLp(self.theta, self.p, delta)

    def _rot(self, g1, g2):
        c, s = self._c, self._s
        return c * g1 + s * g2, -s * g1 + c * g2

    def value(self, x, y, g1, g2):
        r1, r2 = self._rot(np.asarray(g1, dtype=float), np.asarray(g2, dtype=float))
        a1 = _sabs(r1, self.delta)
        a2 = _sabs(r2, self.delta)
        if self.p == 1.0:
            return a1 + a2
        return (a1 ** self.p + a2 ** self.p) ** (1.0 / self.p)

    def sq_grad(self, x, y, g1, g2):
        self._require_smoothed()
        r1, r2 = self._rot(np.asarray(g1, dtype=float), np.asarray(g2, dtype=float))
        a1 = _sabs(r1, self.delta)
        a2 = _sabs(r2, self.delta)
        d1 = _dsabs(r1, self.delta)
        d2 = _dsabs(r2, self.delta)
        p = self.p
        if p == 1.0:
            f = a1 + a2
            w1 = 2.0 * f * d1
            w2 = 2.0 * f * d2
        else:
            S = a1 ** p + a2 ** p
            # 2 * S^(2/p - 1) * a_k^(p-1) * a_k', with S = 0 only at xi = 0
            pref = np.where(S > 0.0, S, 1.0) ** (2.0 / p - 1.0)
            pref = np.where(S > 0.0, pref, 0.0)
            w1 = 2.0 * pref * a1 ** (p - 1.0) * d1
            w2 = 2.0 * pref * a2 ** (p - 1.0) * d2
        c, s = self._c, self._s
        return w1 * c - w2 * s, w1 * s + w2 * c


def RotatedL1(theta: float = 0.0, delta: float = 1e-6) -> RotatedLp:
    """l1 norm in coordinates rotated by theta."""
    a = RotatedLp(theta, 1.0, delta)
    a.kind = "rotated_l1"
    return a


def Lp(p: float, delta: float = 1e-6) -> RotatedLp:
    """Unrotated lp norm (|xi1|^p + |xi2|^p)^(1/p)."""
    a = RotatedLp(0.0, p, delta)
    a.kind = "lp"
    return a


class ProductRoot(Anisotropy):
    """Root of a product of elliptic quadratic forms: (prod_k q_k)^(1/2K).

    Each factor is (a, b, theta) with q_k = a*r1^2 + b*r2^2 in coordinates
    rotated by theta.  One-homogeneous but not convex; favors the valley
    directions of every factor simultaneously.
    """

    kind = "product_root"
    convex = False

    def __init__(self, factors: Sequence[tuple]):
        if not factors:
            raise ValueError("product_root needs at least one factor")
        self.factors = []
        m, M = 1.0, 1.0
        for f in factors:
            if len(f) == 2:
                a, b, th = float(f[0]), float(f[1]), 0.0
            else:
                a, b, th = float(f[0]), float(f[1]), float(f[2])
            if a <= 0 or b <= 0:
                raise ValueError("product_root factor coefficients must be positive")
            self.factors.append((a, b, th))
            m *= min(a, b)
            M *= max(a, b)
        K = len(self.factors)
        self.m = m ** (1.0 / (2 * K))
        self.M = M ** (1.0 / (2 * K))

    def params(self):
        return {"factors": [list(f) for f in self.factors]}

    def _forms(self, g1, g2):
        for a, b, th in self.factors:
            c, s = math.cos(th), math.sin(th)
            r1 = c * g1 + s * g2
            r2 = -s * g1 + c * g2
            yield a, b, c, s, r1, r2, a * r1 * r1 + b * r2 * r2

    def sq(self, x, y, g1, g2):
        g1 = np.asarray(g1, dtype=float)
        g2 = np.asarray(g2, dtype=float)
        K = len(self.factors)
        prod = None
        for *_, q in self._forms(g1, g2):
            prod = q if prod is None else prod * q
        return prod ** (1.0 / K)

    def value(self, x, y, g1, g2):
        return np.sqrt(self.sq(x, y, g1, g2))

    def sq_grad(self, x, y, g1, g2):
        g1 = np.asarray(g1, dtype=float)
        g2 = np.asarray(g2, dtype=float)
        K = len(self.factors)
        sq = self.sq(x, y, g1, g2)
        nz = sq > 0.0
        acc1 = np.zeros(np.broadcast(g1, g2).shape)
        acc2 = np.zeros_like(acc1)
        for a, b, c, s, r1, r2, q in self._forms(g1, g2):
            qsafe = np.where(nz, q, 1.0)
            dq1 = 2.0 * a * r1 * c - 2.0 * b * r2 * s
            dq2 = 2.0 * a * r1 * s + 2.0 * b * r2 * c
            acc1 += dq1 / qsafe
            acc2 += dq2 / qsafe
        scale = np.where(nz, sq, 0.0) / K
        return scale * acc1, scale * acc2


NuLike = Union[Field, Callable[[np.ndarray, np.ndarray], np.ndarray]]


class DensityWeighted(Anisotropy):
    """Separable position dependence: phi(x, xi) = nu(x) * base(xi).

    nu is a positive bounded density given either as a Field (sampled by
    bilinear interpolation) or as a closed-form callable of (x, y).
    """

    kind = "density_weighted"

    def __init__(self, base: Anisotropy, nu: NuLike,
                 nu_bounds: Optional[tuple[float, float]] = None):
        self.base = base
        self.delta = base.delta
        self.convex = base.convex
        self.smooth = base.smooth
        if isinstance(nu, Field):
            inside = nu.grid.inside()
            vals = nu.values[inside]
            if not np.all(np.isfinite(vals)):
                raise ValueError("density weight must be finite")
            if np.any(vals <= 0.0):
                raise ValueError("density weight must be positive on unmasked nodes")
            lo, hi = float(vals.min()), float(vals.max())
            self._nu = nu.sample
            self._nu_field = nu
        else:
            self._nu = nu
            self._nu_field = None
            lo, hi = nu_bounds if nu_bounds is not None else (1.0, 1.0)
        self.nu_min, self.nu_max = lo, hi
        self.m = lo * base.m
        self.M = hi * base.M

    def params(self):
        return {"base": self.base.spec()}

    def with_delta(self, delta: float) -> "DensityWeighted":
        out = DensityWeighted.__new__(DensityWeighted)
        out.__dict__.update(self.__dict__)
        out.base = self.base.with_delta(delta)
        out.delta = out.base.delta
        return out

    def nu(self, x, y) -> np.ndarray:
        return np.asarray(self._nu(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def value(self, x, y, g1, g2):
        return self.nu(x, y) * self.base.value(x, y, g1, g2)

    def sq(self, x, y, g1, g2):
        w = self.nu(x, y)
        return w * w * self.base.sq(x, y, g1, g2)

    def sq_grad(self, x, y, g1, g2):
        w = self.nu(x, y)
        d1, d2 = self.base.sq_grad(x, y, g1, g2)
        return w * w * d1, w * w * d2


def make_density_weight(base: Anisotropy, nu: Field) -> DensityWeighted:
    """Weight a direction norm by a positive node-sampled density."""
    return DensityWeighted(base, nu)


def make_anisotropy(kind: str, **params) -> Anisotropy:
    """Construct a catalog anisotropy from its config name and parameters."""
    kind = kind.lower()
    if kind == "euclidean":
        return Euclidean()
    if kind == "lp":
        return Lp(params["p"], params.get("delta", 1e-6))
    if kind == "elliptic":
        return Elliptic(params["a"], params["b"])
    if kind == "rotated_l1":
        return RotatedL1(params.get("theta", 0.0), params.get("delta", 1e-6))
    if kind == "rotated_lp":
        return RotatedLp(params.get("theta", 0.0), params["p"], params.get("delta", 1e-6))
    if kind == "product_root":
        return ProductRoot([tuple(f) for f in params["factors"]])
    raise ValueError(f"unknown anisotropy kind {kind!r}")


def catalog() -> list[Anisotropy]:
    """One representative instance of every direction-dependent kind."""
    return [
        Euclidean(),
        Lp(1.5),
        Elliptic(1.0, 100.0),
        RotatedL1(0.0),
        RotatedL1(math.pi / 4),
        RotatedLp(math.pi / 6, 1.5),
        ProductRoot([(100.0, 1.0, 0.0), (1.0, 100.0, 0.0)]),
    ]
