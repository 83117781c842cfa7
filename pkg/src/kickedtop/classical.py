"""Classical kicked-top map on the unit sphere."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .spinalg import ContractError

SPHERE_TOL = 1e-12
POLE_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    X: float
    Y: float
    Z: float

    def __post_init__(self):
        r2 = self.X * self.X + self.Y * self.Y + self.Z * self.Z
        if abs(r2 - 1.0) > SPHERE_TOL:
            raise ContractError(f"point ({self.X}, {self.Y}, {self.Z}) is off the unit sphere by {r2 - 1.0:.3e}")

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])

    def __neg__(self) -> "SpherePoint":
        return SpherePoint(-self.X, -self.Y, -self.Z)

    def to_angles(self) -> "Angles":
        z = min(1.0, max(-1.0, self.Z))
        theta = math.acos(z)
        if math.sin(theta) < POLE_TOL:
            return Angles(theta, 0.0)
        phi = math.atan2(self.Y, self.X)
        if phi == -math.pi:
            phi = math.pi
        return Angles(theta, phi)


@dataclass(frozen=True)
class Angles:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi) or not (-math.pi < self.phi <= math.pi):
            raise ContractError(f"angles ({self.theta}, {self.phi}) outside [0, pi] x (-pi, pi]")

    def to_point(self) -> SpherePoint:
        st = math.sin(self.theta)
        return SpherePoint(st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta))


def _step(x, y, z, k, cp, sp):
    """One application of the map on coordinate arrays (or floats)."""
    u = x * cp + z * sp
    w = z * cp - x * sp
    ckw, skw = np.cos(k * w), np.sin(k * w)
    return u * ckw - y * skw, u * skw + y * ckw, w


def map_step(point: SpherePoint, k: float, p: float) -> SpherePoint:
    """Precess by ``p`` about y, then twist about z by ``k`` times the new Z."""
    x, y, z = _step(point.X, point.Y, point.Z, k, math.cos(p), math.sin(p))
    return SpherePoint(float(x), float(y), float(z))


SPECIAL_P = ("pi/2", "pi", "2pi")


def map_step_special(point: SpherePoint, k: float, which: str) -> SpherePoint:
    """Reduced map for ``p`` in ``pi/2``, ``pi`` or ``2pi``.

    At ``p = pi`` the y-component reads ``X sin(kZ) + Y cos(kZ)``; this is what
    the general map reduces to and keeps the point on the sphere.
    """
    X, Y, Z = point.X, point.Y, point.Z
    if which == "pi/2":
        c, s = math.cos(k * X), math.sin(k * X)
        out = (Z * c + Y * s, Y * c - Z * s, -X)
    elif which == "pi":
        c, s = math.cos(k * Z), math.sin(k * Z)
        out = (Y * s - X * c, X * s + Y * c, -Z)
    elif which == "2pi":
        c, s = math.cos(k * Z), math.sin(k * Z)
        out = (X * c - Y * s, X * s + Y * c, Z)
    else:
        raise ContractError(f"no reduced map for p={which!r}; choose from {SPECIAL_P}")
    return SpherePoint(*out)


def trajectory(start: Angles, k: float, p: float, steps: int) -> list:
    """``steps + 1`` angle pairs, starting with ``start``."""
    if steps < 0:
        raise ContractError(f"steps must be >= 0, got {steps}")
    out = [start]
    pt = start.to_point()
    for _ in range(steps):
        pt = map_step(pt, k, p)
        out.append(pt.to_angles())
    return out


def initial_conditions(n_initial: int, seed: int) -> np.ndarray:
    """Grid in ``(cos theta, phi)`` with seeded jitter; returns ``(n, 3)`` unit vectors."""
    if n_initial < 1:
        raise ContractError("n_initial must be >= 1")
    rng = np.random.default_rng(seed)
    n_z = max(1, int(round(math.sqrt(n_initial / 2))))
    n_phi = math.ceil(n_initial / n_z)
    cells = [(iz, ip) for iz in range(n_z) for ip in range(n_phi)][:n_initial]
    jitter = rng.random((len(cells), 2))
    iz = np.array([c[0] for c in cells]) + jitter[:, 0]
    ip = np.array([c[1] for c in cells]) + jitter[:, 1]
    z = -1 + 2 * iz / n_z
    phi = -math.pi + 2 * math.pi * ip / n_phi
    r = np.sqrt(np.clip(1 - z * z, 0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def iterate_cloud(starts: np.ndarray, k: float, p: float, steps: int) -> np.ndarray:
    """All iterates of many starting points: shape ``(n, steps + 1, 3)``."""
    cp, sp = math.cos(p), math.sin(p)
    out = np.empty((starts.shape[0], steps + 1, 3))
    out[:, 0] = starts
    x, y, z = starts[:, 0], starts[:, 1], starts[:, 2]
    for t in range(1, steps + 1):
        x, y, z = _step(x, y, z, k, cp, sp)
        out[:, t, 0], out[:, t, 1], out[:, t, 2] = x, y, z
    return out


def to_angle_arrays(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised point -> (theta, phi) with phi = 0 at the poles and phi in (-pi, pi]."""
    z = np.clip(xyz[..., 2], -1.0, 1.0)
    theta = np.arccos(z)
    phi = np.arctan2(xyz[..., 1], xyz[..., 0])
    phi = np.where(phi == -np.pi, np.pi, phi)
    phi = np.where(np.sin(theta) < POLE_TOL, 0.0, phi)
    return theta, phi


@dataclass(frozen=True)
class PhasePortrait:
    k: float
    p: float
    seed: int
    points: np.ndarray  # (n_traj, steps + 1, 3)

    def angles(self) -> tuple[np.ndarray, np.ndarray]:
        return to_angle_arrays(self.points)

    def rows(self):
        """``(traj_id, step, theta, phi)`` in trajectory-then-step order."""
        theta, phi = self.angles()
        n, m = theta.shape
        for i in range(n):
            for t in range(m):
                yield i, t, float(theta[i, t]), float(phi[i, t])


def phase_portrait(k: float, p: float, n_initial: int, steps: int, seed: int = 0) -> PhasePortrait:
    if steps < 1:
        raise ContractError("steps must be >= 1")
    starts = initial_conditions(n_initial, seed)
    return PhasePortrait(k, p, seed, iterate_cloud(starts, k, p, steps))


def trajectory_spread(portrait: PhasePortrait) -> float:
    """Mean nearest-neighbour chord distance within each trajectory.

    Regular orbits trace curves and keep this small; chaotic orbits fill
    areas and push it up.
    """
    spreads = []
    for traj in portrait.points:
        d, _ = cKDTree(traj).query(traj, k=2)
        spreads.append(d[:, 1].mean())
    return float(np.mean(spreads))


def inversion_conjugacy_check(point: SpherePoint, k: float, p: float) -> float:
    """``max |F_{-k}(-v) + F_k(v)|``: zero when full inversion conjugates k to -k."""
    a = map_step(-point, -k, p).as_array()
    b = map_step(point, k, p).as_array()
    return float(np.max(np.abs(a + b)))
