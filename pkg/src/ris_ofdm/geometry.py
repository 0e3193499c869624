"""Node placement and coordinate handling.

The RIS sits at the origin in the x-z plane; users and the BS live in the
y > 0 half of the x-y plane.  Angles are radians throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AZIMUTH_MARGIN = 1e-6


@dataclass(frozen=True)
class PolarPosition:
    """Spherical position ``(range, azimuth, elevation)`` of a node."""

    range: float
    azimuth: float
    elevation: float = np.pi / 2

    def __post_init__(self):
        if not self.range > 0:
            raise ValueError(f"range must be positive, got {self.range}")

    def cartesian(self) -> np.ndarray:
        return polar_to_cartesian(self)

    @classmethod
    def from_cartesian(cls, point) -> "PolarPosition":
        return cartesian_to_polar(point)


@dataclass(frozen=True)
class RisGeometry:
    n_x: int
    n_z: int
    d_x: float
    d_z: float
    element_centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_x < 1 or self.n_z < 1:
            raise ValueError("element counts must be >= 1")
        if self.d_x <= 0 or self.d_z <= 0:
            raise ValueError("element spacing must be positive")
        xs = self.d_x * (np.arange(1, self.n_x + 1) - (self.n_x + 1) / 2)
        zs = self.d_z * (np.arange(1, self.n_z + 1) - (self.n_z + 1) / 2)
        # x fastest, matching the element enumeration of the phase profile
        zz, xx = np.meshgrid(zs, xs, indexing="ij")
        centers = np.stack([xx.ravel(), np.zeros(xx.size), zz.ravel()], axis=1)
        centers.setflags(write=False)
        object.__setattr__(self, "element_centers", centers)

    @classmethod
    def from_size(cls, n_x: int, n_z: int, size_x: float, size_z: float) -> "RisGeometry":
        return cls(n_x, n_z, size_x / n_x, size_z / n_z)

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_z

    @property
    def size_x(self) -> float:
        return self.d_x * self.n_x

    @property
    def size_z(self) -> float:
        return self.d_z * self.n_z


@dataclass(frozen=True)
class Scenario:
    bs: PolarPosition
    users: tuple
    ris: RisGeometry
    ring: tuple

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if len(self.users) < 1:
            raise ValueError("a scenario needs at least one user")
        r_inn, r_out = self.ring
        for u in self.users:
            if not r_inn <= u.range <= r_out:
                raise ValueError(f"user range {u.range} outside ring {self.ring}")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def user_ranges(self) -> np.ndarray:
        return np.array([u.range for u in self.users])

    def user_azimuths(self) -> np.ndarray:
        return np.array([u.azimuth for u in self.users])

    def user_cartesian(self) -> np.ndarray:
        return polar_to_cartesian_array(
            self.user_ranges(), self.user_azimuths(),
            np.array([u.elevation for u in self.users]))


def element_center(ris: RisGeometry, n: int, n_prime: int) -> np.ndarray:
    """Center of element ``(n, n')``, both indices 1-based."""
    if not (1 <= n <= ris.n_x and 1 <= n_prime <= ris.n_z):
        raise ValueError(
            f"element index ({n}, {n_prime}) out of range for a "
            f"{ris.n_x}x{ris.n_z} surface")
    return np.array([ris.d_x * (n - (ris.n_x + 1) / 2),
                     0.0,
                     ris.d_z * (n_prime - (ris.n_z + 1) / 2)])


def polar_to_cartesian_array(r, azimuth, elevation=np.pi / 2) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.broadcast_to(np.asarray(elevation, dtype=float), r.shape)
    s = np.sin(elevation)
    return np.stack([r * s * np.cos(azimuth),
                     r * s * np.sin(azimuth),
                     r * np.cos(elevation)], axis=-1)


def polar_to_cartesian(p: PolarPosition) -> np.ndarray:
    return polar_to_cartesian_array(p.range, p.azimuth, p.elevation)


def cartesian_to_polar(point) -> PolarPosition:
    x, y, z = (float(v) for v in point)
    r = float(np.sqrt(x * x + y * y + z * z))
    if r == 0:
        raise ValueError("the origin has no polar representation")
    return PolarPosition(r, float(np.arctan2(y, x)), float(np.arccos(z / r)))


def bs_ue_distance(bs: PolarPosition, ue: PolarPosition) -> float:
    return float(np.linalg.norm(polar_to_cartesian(bs) - polar_to_cartesian(ue)))


def sample_ring(K: int, ring, rng: np.random.Generator,
                radius_law: str = "area_uniform") -> list[PolarPosition]:
    """Drop ``K`` users at random in the half ring ``R_inn <= r <= R_out``.

    ``radius_law="area_uniform"`` draws positions uniformly over the ring
    area; ``"range_uniform"`` draws the range itself uniformly.  Azimuths are
    uniform on ``(0, pi)`` shrunk by ``AZIMUTH_MARGIN`` at both ends.
    """
    r, phi = sample_ring_arrays(K, ring, rng, radius_law)
    return [PolarPosition(float(a), float(b)) for a, b in zip(r, phi)]


def sample_ring_arrays(K: int, ring, rng: np.random.Generator,
                       radius_law: str = "area_uniform"):
    r_inn, r_out = ring
    if K < 1:
        raise ValueError(f"need at least one user, got K={K}")
    if not 0 < r_inn < r_out:
        raise ValueError(f"invalid ring radii {ring}")
    u = rng.random(K)
    if radius_law == "area_uniform":
        r = np.sqrt(r_inn**2 + u * (r_out**2 - r_inn**2))
    elif radius_law == "range_uniform":
        r = r_inn + u * (r_out - r_inn)
    else:
        raise ValueError(f"unknown radius law {radius_law!r}")
    phi = rng.uniform(AZIMUTH_MARGIN, np.pi - AZIMUTH_MARGIN, K)
    return r, phi
