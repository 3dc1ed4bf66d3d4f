"""Hexagonal 7-site tri-sector layout with toroidal wrap-around.

The 7-site cluster tiles the plane under the lattice spanned by
v1 = isd*(2.5, sqrt(3)/2) and v2 = isd*(0.5, 3*sqrt(3)/2); wrap-around
distances are minima over lattice translations of the UE position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SECTOR_AZIMUTHS = (0.0, 120.0, 240.0)


@dataclass(frozen=True)
class Sector:
    index: int
    site: int
    position: tuple[float, float]
    azimuth_deg: float
    height_m: float


@dataclass(frozen=True, eq=False)
class NetworkLayout:
    isd_m: float
    bs_height_m: float
    site_positions: np.ndarray  # (7, 2)
    sectors: tuple[Sector, ...]
    wrap_offsets: np.ndarray    # (25, 2) lattice translations incl. zero
    lattice: np.ndarray         # (2, 2) rows v1, v2


def build_layout(isd_m: float = 500.0, bs_height_m: float = 25.0) -> NetworkLayout:
    if isd_m <= 0:
        raise ValueError("isd_m must be positive")
    ring = np.array([[np.cos(np.deg2rad(60.0 * k)), np.sin(np.deg2rad(60.0 * k))]
                     for k in range(6)])
    sites = np.vstack([[0.0, 0.0], ring]) * isd_m

    v1 = isd_m * np.array([2.5, np.sqrt(3.0) / 2.0])
    v2 = isd_m * np.array([0.5, 1.5 * np.sqrt(3.0)])
    mm, nn = np.meshgrid(np.arange(-2, 3), np.arange(-2, 3))
    offsets = mm.reshape(-1, 1) * v1 + nn.reshape(-1, 1) * v2

    sectors = []
    for s in range(7):
        for a, az in enumerate(SECTOR_AZIMUTHS):
            sectors.append(Sector(index=3 * s + a, site=s,
                                  position=(float(sites[s, 0]), float(sites[s, 1])),
                                  azimuth_deg=az, height_m=bs_height_m))
    return NetworkLayout(isd_m=isd_m, bs_height_m=bs_height_m,
                         site_positions=sites, sectors=tuple(sectors),
                         wrap_offsets=offsets, lattice=np.vstack([v1, v2]))


def wrapped_displacement(layout: NetworkLayout, point_xy: np.ndarray,
                         site_xy: np.ndarray) -> np.ndarray:
    """2D displacement site -> point minimizing distance over wrap copies."""
    cand = point_xy[None, :] + layout.wrap_offsets - site_xy[None, :]
    best = np.argmin(np.einsum("ij,ij->i", cand, cand))
    return cand[best]


def wrapped_distance_2d(layout: NetworkLayout, point_xy: np.ndarray,
                        site_xy: np.ndarray) -> float:
    return float(np.linalg.norm(wrapped_displacement(layout, point_xy, site_xy)))


def sample_area_point(layout: NetworkLayout, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the wrap torus (fundamental parallelogram, centered)."""
    u, v = rng.uniform(-0.5, 0.5, size=2)
    return u * layout.lattice[0] + v * layout.lattice[1]
