"""UL pilot sounding: reuse-3 sequence plan, power control, LS estimation.

Pilots are orthogonal inside a cell (3 sectors) and repeated identically
in every cell, so an estimate is contaminated by exactly one (UE,
antenna) per other cell: the one holding the same sequence index.  Under
TDD reciprocity the estimated UL port channel is used directly for DL
precoding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import UeDrop

BOLTZMANN_NOISE_DBM_HZ = -174.0


class EstimationError(RuntimeError):
    pass


@dataclass(frozen=True)
class UlPowerControl:
    coverage_fraction: float = 0.9
    max_psd_dbm_per_10mhz: float = 23.0


@dataclass(frozen=True, eq=False)
class PilotPlan:
    length: int                  # sequences per cell = 3 * n_per_sector * 2
    cell_of_ue: np.ndarray       # (M,)
    rank_in_cell: np.ndarray     # (M,) position inside the cell's index block
    cell_members: list           # per cell: UE indices ordered by rank

    def sequence_index(self, ue: int, antenna: int) -> int:
        return 2 * int(self.rank_in_cell[ue]) + antenna

    def collider(self, cell: int, seq_index: int) -> tuple[int, int]:
        """(UE, antenna) holding `seq_index` in `cell`."""
        return int(self.cell_members[cell][seq_index // 2]), seq_index % 2


def assign_pilots(drop: UeDrop) -> PilotPlan:
    """Index-identical pilot reuse across the 7 cells."""
    cells = drop.serving_sector // 3
    order = np.lexsort((np.arange(len(cells)), drop.serving_sector))
    rank = np.zeros(len(cells), dtype=int)
    members: list[list[int]] = [[] for _ in range(7)]
    for ue in order:
        c = int(cells[ue])
        rank[ue] = len(members[c])
        members[c].append(int(ue))
    sizes = {len(m) for m in members}
    if len(sizes) != 1:
        raise ValueError(f"unequal per-cell UE counts: {[len(m) for m in members]}")
    return PilotPlan(length=2 * sizes.pop(), cell_of_ue=cells, rank_in_cell=rank,
                     cell_members=[np.array(m) for m in members])


def pilot_tx_psd(drop: UeDrop, power_control: UlPowerControl) -> np.ndarray:
    """Per-UE pilot PSD in dBm/10 MHz.

    The coupling-loss percentile at `coverage_fraction` (network-wide,
    this drop) fixes the receive target; UEs above it are clamped to the
    PSD cap, everyone else exactly compensates their coupling loss.
    """
    cl = np.array([drop.links[k][int(drop.serving_sector[k])].coupling_loss_db
                   for k in range(len(drop.serving_sector))])
    cl_edge = np.percentile(cl, 100.0 * power_control.coverage_fraction)
    target_rx = power_control.max_psd_dbm_per_10mhz - cl_edge
    return np.minimum(power_control.max_psd_dbm_per_10mhz, target_rx + cl)


def psd_to_watts(psd_dbm_per_10mhz: np.ndarray, bandwidth_mhz: float) -> np.ndarray:
    dbm = np.asarray(psd_dbm_per_10mhz) + 10.0 * np.log10(bandwidth_mhz / 10.0)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def bs_noise_watts(bandwidth_mhz: float, noise_figure_db: float) -> float:
    dbm = BOLTZMANN_NOISE_DBM_HZ + 10.0 * np.log10(bandwidth_mhz * 1e6) + noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    ue: int
    h_hat_port: np.ndarray   # (2, P)
    noise_var: float         # per complex port entry


def estimate_channels(sector_idx: int, drop: UeDrop, plan: PilotPlan,
                      pilot_power_w: np.ndarray, h_port: np.ndarray,
                      noise_power_w: float, rng_for_ue) -> list[ChannelEstimate]:
    """LS estimates for the UEs served by one sector, one coherence block.

    h_port holds the true port channels of every UE toward every sector,
    shape (M, n_sectors, 2, P).  For served UE k the estimate per antenna
    is the true row plus the amplitude-weighted rows of the same-index
    (UE, antenna) in each other cell, plus white noise scaled by
    1/(a_k*sqrt(L_p)) with a_k the pilot amplitude sqrt(P_k).
    """
    own_cell = sector_idx // 3
    served = drop.ues_of_sector(sector_idx)
    if served.size == 0:
        return []
    out = []
    for ue in served:
        ue = int(ue)
        a_k = np.sqrt(pilot_power_w[ue])
        if a_k <= 0.0:
            raise EstimationError(f"UE {ue} has zero pilot power")
        h_hat = h_port[ue, sector_idx].astype(np.complex128).copy()
        for ant in (0, 1):
            idx = plan.sequence_index(ue, ant)
            for cell in range(7):
                if cell == own_cell:
                    continue
                jue, jant = plan.collider(cell, idx)
                a_j = np.sqrt(pilot_power_w[jue])
                h_hat[ant] += (a_j / a_k) * h_port[jue, sector_idx, jant]
        noise_var = noise_power_w / (pilot_power_w[ue] * plan.length)
        rng = rng_for_ue(ue)
        noise = rng.standard_normal((2, h_hat.shape[1])) + 1j * rng.standard_normal((2, h_hat.shape[1]))
        h_hat += np.sqrt(noise_var / 2.0) * noise
        out.append(ChannelEstimate(ue=ue, h_hat_port=h_hat, noise_var=noise_var))
    return out
