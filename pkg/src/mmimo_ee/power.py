"""Analog RF front-end power consumption model.

Four per-unit contributors: TX/RX conversion chains scale with antenna
ports, PA and LNA scale with antenna elements (DL splitting happens
before the PAs, UL combining after the LNAs).  The PA draw follows a
Doherty line-up efficiency curve over back-off, a fixed pre-amplifier
overhead, pre-antenna insertion losses and the TDD duty cycle.

The insertion-loss factor defaults to the value that reproduces the
2.07 W per-element PA anchor exactly at the 53 dBm / 256-element
reference point (~1.16).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_EFF_TABLE = ((8.0, 0.40), (11.0, 0.29), (14.0, 0.185))
PA_ANCHOR_W = 2.07
ANCHOR_TOTAL_DBM = 53.0
ANCHOR_ELEMENTS = 256


class SaturationError(ValueError):
    pass


def per_element_tx_power(total_dbm: float, n_elements: int) -> float:
    """Watts radiated per element for an equal split of the sector power."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    return 10.0 ** ((total_dbm - 30.0) / 10.0) / n_elements


def _interp_efficiency(backoff_db: float, table, floor: float) -> float:
    nodes = np.array([t[0] for t in table])
    effs = np.array([t[1] for t in table])
    if backoff_db <= nodes[0]:
        return float(effs[0])
    if backoff_db <= nodes[-1]:
        return float(np.interp(backoff_db, nodes, effs))
    slope = (effs[-1] - effs[-2]) / (nodes[-1] - nodes[-2])
    return max(float(effs[-1] + slope * (backoff_db - nodes[-1])), floor)


@dataclass(frozen=True)
class PaParams:
    eff_table: tuple = DEFAULT_EFF_TABLE
    preamp_w: float = 0.5
    loss_factor: float = 0.0     # 0 -> calibrate from the Table-III anchor
    peak_power_per_pa_w: float = 4.70
    duty_cycle: float = 0.75
    eff_floor: float = 0.05

    def __post_init__(self):
        effs = [e for _, e in self.eff_table]
        if any(not 0.0 < e < 1.0 for e in effs) or any(
                b >= a for a, b in zip(effs, effs[1:])):
            raise ValueError("efficiencies must be in (0,1) and strictly decreasing")
        if self.loss_factor <= 0.0:
            p_anchor = per_element_tx_power(ANCHOR_TOTAL_DBM, ANCHOR_ELEMENTS)
            eta = _interp_efficiency(
                10.0 * np.log10(self.peak_power_per_pa_w / p_anchor),
                self.eff_table, self.eff_floor)
            lf = (PA_ANCHOR_W / self.duty_cycle - self.preamp_w) * eta / p_anchor
            object.__setattr__(self, "loss_factor", lf)


def pa_efficiency(backoff_db: float, params: PaParams) -> float:
    """Line-up efficiency at a back-off: table interpolation, clamped at the
    first node, linearly extrapolated past the last node with a floor."""
    if backoff_db < 0.0:
        raise ValueError("backoff_db must be >= 0")
    return _interp_efficiency(backoff_db, params.eff_table, params.eff_floor)


def backoff_db(p_out_element_w: float, params: PaParams) -> float:
    if p_out_element_w <= 0.0:
        raise ValueError("per-element output power must be positive")
    if p_out_element_w > params.peak_power_per_pa_w:
        raise SaturationError(
            f"{p_out_element_w:.3f} W exceeds PA peak {params.peak_power_per_pa_w:.3f} W")
    return 10.0 * np.log10(params.peak_power_per_pa_w / p_out_element_w)


def pa_dc_power(p_out_element_w: float, params: PaParams) -> float:
    """DC draw of one PA line-up at the given average output power."""
    if p_out_element_w == 0.0:
        return params.duty_cycle * params.preamp_w
    eta = pa_efficiency(backoff_db(p_out_element_w, params), params)
    return params.duty_cycle * (
        p_out_element_w * params.loss_factor / eta + params.preamp_w)


@dataclass(frozen=True)
class BlockPowers:
    lna_w: float = 0.28
    tx_conv_w: float = 2.34
    rx_conv_w: float = 0.9
    pa_anchor_w: float = PA_ANCHOR_W


@dataclass(frozen=True)
class PowerBreakdown:
    tx_conv_total_w: float
    rx_conv_total_w: float
    pa_total_w: float
    lna_total_w: float
    total_w: float


@dataclass(frozen=True)
class LoadPoint:
    n_active_ues: int
    total_tx_power_dbm: float


def total_power(array, load: LoadPoint, blocks: BlockPowers | None = None,
                params: PaParams | None = None) -> PowerBreakdown:
    """Front-end breakdown for one sector: conversion per port, PA/LNA per
    element, identical per-unit values within each block type."""
    blocks = blocks or BlockPowers()
    params = params or PaParams()
    n, p = array.n_elements, array.n_ports
    pa_each = pa_dc_power(per_element_tx_power(load.total_tx_power_dbm, n), params) if n else 0.0
    tx_conv = p * blocks.tx_conv_w
    rx_conv = p * blocks.rx_conv_w
    pa = n * pa_each
    lna = n * blocks.lna_w
    return PowerBreakdown(tx_conv_total_w=tx_conv, rx_conv_total_w=rx_conv,
                          pa_total_w=pa, lna_total_w=lna,
                          total_w=tx_conv + rx_conv + pa + lna)


def energy_efficiency(power: PowerBreakdown, avg_ue_tput_mbps: float,
                      n_ues: int) -> float | None:
    """Watts per served UE per Mb/s; undefined (None) at zero throughput."""
    if n_ues < 1:
        raise ValueError("n_ues must be >= 1")
    if avg_ue_tput_mbps is None or avg_ue_tput_mbps <= 0.0:
        return None
    return power.total_w / (n_ues * avg_ue_tput_mbps)
