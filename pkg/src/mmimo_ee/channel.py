"""UE drops, large-scale link states and clustered channel realizations.

The channel is a clustered geometric surrogate with UMa-like defaults:
log-distance pathloss with distance-decaying LOS probability, lognormal
shadowing, and a sum-of-clusters ray model at the BS side (UE antennas
are co-located cross-polarized omnis, so only departure angles matter).
Cluster geometry is drawn once per drop; ray phases are redrawn per
coherence block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .arrays import (ArrayConfig, ElementPattern, FeederNetwork,
                     direction_unit_vector, element_gain_db, local_angles,
                     rotation_to_local)
from .network import NetworkLayout, sample_area_point, wrapped_displacement


class DropError(RuntimeError):
    """Per-sector UE quotas could not be filled within the attempt cap."""


@dataclass(frozen=True)
class ChannelParams:
    carrier_ghz: float = 2.0
    n_clusters_los: int = 8
    n_clusters_nlos: int = 12
    n_rays: int = 10
    asd_deg: float = 30.0            # azimuth spread of cluster centroids
    zsd_deg: float = 8.0             # zenith spread of cluster centroids
    ray_asd_deg: float = 5.0         # per-cluster ray spread, azimuth
    ray_zsd_deg: float = 2.0         # per-cluster ray spread, zenith
    xpr_db: float = 8.0
    delay_scale_ns: float = 100.0
    cluster_shadow_sigma_db: float = 3.0
    pl_los: tuple[float, float, float] = (28.0, 22.0, 20.0)
    pl_nlos: tuple[float, float, float] = (14.4, 39.1, 20.0)
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 6.0
    ue_height_m: float = 1.5
    min_dist_m: float = 35.0


@dataclass(frozen=True, eq=False)
class LinkState:
    pathloss_db: float
    shadowing_db: float
    los: bool
    coupling_loss_db: float
    bearing_deg: float               # sector bore azimuth
    downtilt_deg: float
    los_az_deg: float                # global departure azimuth toward the UE
    los_zen_deg: float
    delays_s: np.ndarray             # (C,)
    cluster_powers: np.ndarray       # (C,), sums to 1
    ray_az_deg: np.ndarray           # (C, n_rays) global departure azimuth
    ray_zen_deg: np.ndarray          # (C, n_rays)
    xpr_linear: float


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h_element: np.ndarray            # (2 UE antennas, N)
    h_port: np.ndarray               # (2, P) = h_element @ feeder
    coherence_block_id: int


@dataclass(frozen=True, eq=False)
class UeDrop:
    positions: np.ndarray            # (M, 3)
    serving_sector: np.ndarray       # (M,)
    n_per_sector: int
    links: list                      # links[ue][sector] -> LinkState

    def ues_of_sector(self, sector: int) -> np.ndarray:
        return np.flatnonzero(self.serving_sector == sector)


def los_probability(d2d_m: float) -> float:
    d = max(d2d_m, 1e-3)
    return min(18.0 / d, 1.0) * (1.0 - np.exp(-d / 63.0)) + np.exp(-d / 63.0)


def pathloss_db(coeffs: tuple[float, float, float], d3d_m: float, f_ghz: float) -> float:
    a, b, c = coeffs
    return a + b * np.log10(d3d_m) + c * np.log10(f_ghz)


def link_state(layout: NetworkLayout, ue_pos: np.ndarray, sector_idx: int,
               params: ChannelParams, pattern: ElementPattern,
               downtilt_deg: float, rng: np.random.Generator) -> LinkState:
    """Draw the full large-scale + cluster-geometry state of one link."""
    sector = layout.sectors[sector_idx]
    site = np.asarray(sector.position)
    disp = wrapped_displacement(layout, ue_pos[:2], site)
    d2d = float(np.linalg.norm(disp))
    dz = float(ue_pos[2] - sector.height_m)
    d3d = float(np.hypot(d2d, dz))

    los = bool(rng.uniform() < los_probability(d2d))
    pl_los_db = pathloss_db(params.pl_los, d3d, params.carrier_ghz)
    if los:
        pl = pl_los_db
        sigma = params.shadow_sigma_los_db
        n_clusters = params.n_clusters_los
    else:
        pl = max(pl_los_db, pathloss_db(params.pl_nlos, d3d, params.carrier_ghz))
        sigma = params.shadow_sigma_nlos_db
        n_clusters = params.n_clusters_nlos
    shadow = float(rng.normal(0.0, sigma))

    los_az = float(np.rad2deg(np.arctan2(disp[1], disp[0])))
    los_zen = float(np.rad2deg(np.arccos(np.clip(dz / d3d, -1.0, 1.0))))

    rot = rotation_to_local(sector.azimuth_deg, downtilt_deg)
    u_loc = rot @ direction_unit_vector(los_az, los_zen)
    az_l, zen_l = local_angles(u_loc)
    gain_toward_ue = element_gain_db(pattern, az_l, zen_l)
    coupling = pl + shadow - float(gain_toward_ue)

    delays = np.sort(rng.exponential(params.delay_scale_ns * 1e-9, size=n_clusters))
    zeta = rng.normal(0.0, params.cluster_shadow_sigma_db, size=n_clusters)
    az_off = rng.normal(0.0, params.asd_deg, size=n_clusters)
    zen_off = rng.normal(0.0, params.zsd_deg, size=n_clusters)
    if los:
        # First cluster is the direct path: zero excess delay, exact LOS angles.
        delays[0] = 0.0
        zeta[0] = 0.0
        az_off[0] = 0.0
        zen_off[0] = 0.0
    powers = np.exp(-delays / (params.delay_scale_ns * 1e-9)) * 10.0 ** (-zeta / 10.0)
    powers /= powers.sum()

    ray_az = (los_az + az_off)[:, None] + rng.normal(
        0.0, params.ray_asd_deg, size=(n_clusters, params.n_rays))
    ray_zen = (los_zen + zen_off)[:, None] + rng.normal(
        0.0, params.ray_zsd_deg, size=(n_clusters, params.n_rays))
    ray_zen = np.clip(ray_zen, 1.0, 179.0)

    return LinkState(
        pathloss_db=float(pl), shadowing_db=shadow, los=los,
        coupling_loss_db=float(coupling), bearing_deg=sector.azimuth_deg,
        downtilt_deg=downtilt_deg, los_az_deg=los_az, los_zen_deg=los_zen,
        delays_s=delays, cluster_powers=powers,
        ray_az_deg=ray_az, ray_zen_deg=ray_zen,
        xpr_linear=10.0 ** (params.xpr_db / 10.0),
    )


def drop_ues(layout: NetworkLayout, n_per_sector: int, params: ChannelParams,
             pattern: ElementPattern, downtilt_deg: float,
             rng_for_attempt, max_attempts: int = 20000) -> UeDrop:
    """Drop UEs uniformly on the wrap torus until every sector holds exactly
    n_per_sector, attaching each UE to its minimum-coupling-loss sector.

    `rng_for_attempt(i)` must return an independent generator per attempt
    index so drops are reproducible regardless of how many candidates get
    rejected.
    """
    if n_per_sector < 1:
        raise ValueError("n_per_sector must be >= 1")
    n_sectors = len(layout.sectors)
    counts = np.zeros(n_sectors, dtype=int)
    positions, serving, links = [], [], []

    for attempt in range(max_attempts):
        if counts.sum() == n_sectors * n_per_sector:
            break
        rng = rng_for_attempt(attempt)
        xy = sample_area_point(layout, rng)
        dists = [np.linalg.norm(wrapped_displacement(layout, xy, layout.site_positions[s]))
                 for s in range(7)]
        if min(dists) < params.min_dist_m:
            continue
        pos = np.array([xy[0], xy[1], params.ue_height_m])
        ue_links = [link_state(layout, pos, s, params, pattern, downtilt_deg, rng)
                    for s in range(n_sectors)]
        best = int(np.argmin([l.coupling_loss_db for l in ue_links]))
        if counts[best] >= n_per_sector:
            continue
        counts[best] += 1
        positions.append(pos)
        serving.append(best)
        links.append(ue_links)
    else:
        raise DropError(f"could not fill {n_per_sector} UEs/sector within "
                        f"{max_attempts} attempts (counts={counts.tolist()})")

    return UeDrop(positions=np.array(positions), serving_sector=np.array(serving),
                  n_per_sector=n_per_sector, links=links)


def ray_geometry(link: LinkState, array: ArrayConfig):
    """Per-ray amplitudes and local direction components for one link.

    Returns (amp, uy, uz): amplitude includes large-scale gain, cluster
    power split and the element amplitude pattern; uy/uz are the local
    plane-wave direction components matching the element y/z grid.
    """
    n_rays = link.ray_az_deg.shape[1]
    az = link.ray_az_deg.ravel()
    zen = link.ray_zen_deg.ravel()
    rot = rotation_to_local(link.bearing_deg, link.downtilt_deg)
    u_loc = direction_unit_vector(az, zen) @ rot.T
    az_l, zen_l = local_angles(u_loc)
    gains_db = element_gain_db(array.pattern, az_l, zen_l)
    large_scale = 10.0 ** (-(link.pathloss_db + link.shadowing_db) / 20.0)
    ray_power = np.repeat(link.cluster_powers / n_rays, n_rays)
    amp = large_scale * np.sqrt(ray_power) * 10.0 ** (gains_db / 20.0)
    return amp, u_loc[:, 1].copy(), u_loc[:, 2].copy()


def draw_ray_coefficients(link: LinkState, n_total_rays: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Random-phase XPR coupling coefficients, shape (2 ant, 2 pol, R).

    Co-polarized and cross-polarized couplings split unit power per UE
    antenna: |co|^2 + |cross|^2 = 1 with |co|^2/|cross|^2 = XPR.
    """
    x = link.xpr_linear
    co = np.sqrt(x / (1.0 + x))
    cross = np.sqrt(1.0 / (1.0 + x))
    kappa = np.array([[co, cross], [cross, co]])
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(2, 2, n_total_rays))
    return kappa[:, :, None] * np.exp(1j * phases)


def element_channel_from_grid(h_grid: np.ndarray, array: ArrayConfig) -> np.ndarray:
    """Gather the (2, 2, NC*NZ) grid response into element order (2, N)."""
    return h_grid[:, array.elem_pol_idx, array.elem_grid_idx]


def port_channel(h_element: np.ndarray, array: ArrayConfig) -> np.ndarray:
    """Project element-domain rows through the equal-split feeder."""
    m_s = array.subarray_size
    shaped = h_element.reshape(h_element.shape[0], array.n_ports, m_s)
    return shaped.sum(axis=2) / np.sqrt(m_s)


def realize_channel(link: LinkState, array: ArrayConfig, feeder: FeederNetwork,
                    block: int, rng: np.random.Generator) -> ChannelRealization:
    """One coherence block: sum of plane waves over the link's rays."""
    amp, uy, uz = ray_geometry(link, array)
    coef = draw_ray_coefficients(link, amp.shape[0], rng)
    e = kernels.ray_element_matrix(amp, uy, uz, array.grid_y, array.grid_z)
    h_grid = coef.reshape(4, -1) @ e
    h_element = element_channel_from_grid(h_grid.reshape(2, 2, -1), array)
    h_port = h_element @ feeder.weights
    return ChannelRealization(h_element=h_element, h_port=h_port,
                              coherence_block_id=block)


def mean_channel_power(link: LinkState, array: ArrayConfig) -> float:
    """E[||h_element||_F^2] over ray phases (both UE antennas)."""
    amp, _, _ = ray_geometry(link, array)
    return float(array.n_elements * np.sum(amp ** 2))
