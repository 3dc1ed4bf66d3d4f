"""Seeded Monte Carlo sweep over (array type, active UEs) cells.

One drop is the unit of work: UE placement, link states and ray phases
are shared by every array type (common random numbers), so type
comparisons at a load ride on identical propagation.  Channels are
synthesized once on the union element grid and projected onto each
type's elements and ports.

All randomness is counter-seeded per (load, drop, block, entity);
results are byte-identical for any worker count.
"""

from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import kernels, seeding
from .adapt import PerfPoint, PerfTable, tx_power_for_load
from .arrays import ArrayConfig, build_array
from .channel import (ChannelParams, DropError, UeDrop, draw_ray_coefficients,
                      drop_ues, ray_geometry)
from .config import ScenarioConfig, scenario_to_dict
from .mumimo import (PrecodingError, ScheduleDecision, SchedulingError,
                     dl_sinr, sector_metrics, sus_schedule, zf_precode)
from .power import (BlockPowers, LoadPoint, PaParams, PowerBreakdown,
                    total_power)
from .sounding import (assign_pilots, bs_noise_watts, estimate_channels,
                       pilot_tx_psd, psd_to_watts)

_SUB_SLOTS = 4


@dataclass(frozen=True)
class DropSample:
    cell_se_bps_hz: float
    avg_ue_tput_mbps: float
    sinr_db_p5: float
    sinr_db_p50: float
    sinr_db_p95: float
    mean_layers: float


@dataclass
class CellResult:
    array_type: str
    n_ues: int
    samples: dict                    # metric -> per-drop list
    aggregates: dict                 # metric -> {mean, stderr, p5, p50, p95}
    power: PowerBreakdown
    tx_power_dbm: float
    ee_w_per_ue_mbps: float | None


@dataclass
class RunResult:
    config: dict
    cells: dict                      # (type, n_ues) -> CellResult
    failures: list = field(default_factory=list)


def _pa_params(cfg: ScenarioConfig) -> PaParams:
    return PaParams(eff_table=cfg.power.eff_table, preamp_w=cfg.power.preamp_w,
                    loss_factor=cfg.power.loss_factor,
                    peak_power_per_pa_w=cfg.power.peak_pa_w,
                    duty_cycle=cfg.power.duty_cycle)


def _block_powers(cfg: ScenarioConfig) -> BlockPowers:
    return BlockPowers(lna_w=cfg.power.lna_w, tx_conv_w=cfg.power.tx_conv_w,
                       rx_conv_w=cfg.power.rx_conv_w,
                       pa_anchor_w=cfg.power.pa_anchor_w)


def noise_watts(bandwidth_mhz: float, noise_figure_db: float) -> float:
    return bs_noise_watts(bandwidth_mhz, noise_figure_db)


def sector_dl_power_dbm(cfg: ScenarioConfig, array: ArrayConfig, n_ues: int) -> float:
    try:
        base = cfg.phy.bs_power_dbm[array.n_elements]
    except KeyError:
        raise KeyError(f"phy.bs_power_dbm has no entry for {array.n_elements} elements")
    if cfg.phy.scale_power_with_load:
        return base + 10.0 * np.log10(n_ues / cfg.phy.load_ref_n_ues)
    return base


def synthesize_port_channels(cfg: ScenarioConfig, arrays: dict, drop: UeDrop,
                             n_ues: int, drop_idx: int) -> dict:
    """True port channels for every (UE, sector, block) and array type.

    Returns {type: (M, S, B, 2, P_type) complex}.  All types share the
    union element grid, ray geometry and per-block phase draws.
    """
    ref = next(iter(arrays.values()))
    nz_full = (max(int(a.elem_zslot.max()) for a in arrays.values()) // _SUB_SLOTS + 1) * _SUB_SLOTS
    z_all = (np.arange(nz_full) - (nz_full - 1) / 2.0) * ref.element_spacing[1]
    zslots = np.unique(np.concatenate([a.elem_zslot for a in arrays.values()]))
    rank = {int(s): i for i, s in enumerate(zslots)}
    grid_z = z_all[zslots]
    grid_y = ref.grid_y
    n_grid = len(grid_y) * len(grid_z)

    gather = {}
    for t, a in arrays.items():
        union_idx = a.elem_col * len(zslots) + np.array(
            [rank[int(s)] for s in a.elem_zslot])
        gather[t] = (a.elem_pol_idx, union_idx, a.n_ports, a.subarray_size)

    n_ue_tot = len(drop.positions)
    n_sectors = len(drop.links[0])
    n_blocks = cfg.n_blocks
    out = {t: np.empty((n_ue_tot, n_sectors, n_blocks, 2, a.n_ports), dtype=np.complex128)
           for t, a in arrays.items()}

    for ue in range(n_ue_tot):
        for s in range(n_sectors):
            link = drop.links[ue][s]
            amp, uy, uz = ray_geometry(link, ref)
            e = kernels.ray_element_matrix(amp, uy, uz, grid_y, grid_z)
            coefs = [draw_ray_coefficients(
                link, amp.shape[0],
                seeding.stream(cfg.seed, seeding.PHASE, n_ues, drop_idx, b, ue, s))
                for b in range(n_blocks)]
            h_grid = (np.stack(coefs).reshape(4 * n_blocks, -1) @ e)
            h_grid = h_grid.reshape(n_blocks, 2, 2, n_grid)
            for t, (pol_idx, union_idx, n_ports, m_s) in gather.items():
                h_el = h_grid[:, :, pol_idx, union_idx]
                out[t][ue, s] = h_el.reshape(n_blocks, 2, n_ports, m_s).sum(-1) / np.sqrt(m_s)
    return out


def _precode_with_retry(decision: ScheduleDecision, sector_power_w: float):
    """ZF, dropping the weakest layer until the rows are well conditioned."""
    rows, ues, ants = decision.rows, decision.ue_indices, decision.antennas
    while True:
        try:
            pre = zf_precode(rows, sector_power_w)
            return ScheduleDecision(ue_indices=ues, antennas=ants, rows=rows), pre
        except PrecodingError:
            if len(ues) <= 1:
                raise
            weakest = int(np.argmin(np.linalg.norm(rows, axis=1)))
            keep = np.arange(len(ues)) != weakest
            rows, ues, ants = rows[keep], ues[keep], ants[keep]


def run_type_pipeline(cfg: ScenarioConfig, array: ArrayConfig, h_port: np.ndarray,
                      drop: UeDrop, n_ues: int, drop_idx: int) -> DropSample:
    """Sound, schedule, precode and score one drop for one array type."""
    plan = assign_pilots(drop)
    pilot_w = psd_to_watts(pilot_tx_psd(drop, cfg.ul), cfg.bandwidth_mhz)
    noise_bs = bs_noise_watts(cfg.bandwidth_mhz, cfg.ul_bs_noise_figure_db)
    noise_ue = bs_noise_watts(cfg.bandwidth_mhz, cfg.phy.ue_noise_figure_db)
    bw_hz = cfg.bandwidth_mhz * 1e6
    power_dbm = sector_dl_power_dbm(cfg, array, n_ues)
    sector_power_w = 10.0 ** ((power_dbm - 30.0) / 10.0)
    n_sectors = h_port.shape[1]

    cell_se, tputs, sinr_dbs, layers = [], [], [], []
    for b in range(cfg.n_blocks):
        schedules, precoders = [], []
        for s in range(n_sectors):
            ests = estimate_channels(
                s, drop, plan, pilot_w, h_port[:, :, b], noise_bs,
                rng_for_ue=lambda ue, _s=s, _b=b: seeding.stream(
                    cfg.seed, seeding.EST_NOISE, n_ues, drop_idx, _b, _s, ue))
            if not ests:
                schedules.append(None)
                precoders.append(None)
                continue
            k_max = min(array.n_ports, len(ests),
                        cfg.sched.k_max or array.n_ports)
            dec = sus_schedule(ests, k_max, cfg.sched.alpha, sector_power_w,
                               noise_ue, cfg.phy.se_cap)
            dec, pre = _precode_with_retry(dec, sector_power_w)
            schedules.append(dec)
            precoders.append(pre)

        rows_by_sector = []
        for s in range(n_sectors):
            dec = schedules[s]
            if dec is None or len(dec.ue_indices) == 0:
                rows_by_sector.append(np.zeros((0, n_sectors, array.n_ports)))
                continue
            rows_by_sector.append(h_port[dec.ue_indices, :, b, dec.antennas, :])
        sinrs = dl_sinr(rows_by_sector, schedules, precoders, noise_ue)

        for s in range(n_sectors):
            if schedules[s] is None:
                continue
            m = sector_metrics(sinrs[s], bw_hz, cfg.phy.overhead, cfg.phy.se_cap)
            cell_se.append(m.cell_se_bps_hz)
            tputs.extend(m.throughput_mbps.tolist())
            sinr_dbs.extend(m.sinr_db.tolist())
            layers.append(len(schedules[s].ue_indices))

    sinr_arr = np.array(sinr_dbs)
    return DropSample(
        cell_se_bps_hz=float(np.mean(cell_se)),
        avg_ue_tput_mbps=float(np.mean(tputs)),
        sinr_db_p5=float(np.percentile(sinr_arr, 5)),
        sinr_db_p50=float(np.percentile(sinr_arr, 50)),
        sinr_db_p95=float(np.percentile(sinr_arr, 95)),
        mean_layers=float(np.mean(layers)),
    )


def simulate_drop(cfg: ScenarioConfig, n_ues: int, drop_idx: int) -> dict:
    """All array types on one shared drop; {type: DropSample | error str}."""
    layout_arrays = {t: build_array(t, cfg.array) for t in cfg.types}
    from .network import build_layout

    layout = build_layout(cfg.isd_m, cfg.bs_height_m)
    drop = drop_ues(
        layout, n_ues, cfg.channel, cfg.array.pattern, cfg.array.downtilt_deg,
        rng_for_attempt=lambda i: seeding.stream(
            cfg.seed, seeding.ATTACH, n_ues, drop_idx, i),
        max_attempts=cfg.drop_max_attempts)
    h_ports = synthesize_port_channels(cfg, layout_arrays, drop, n_ues, drop_idx)

    results = {}
    for t in cfg.types:
        try:
            results[t] = run_type_pipeline(cfg, layout_arrays[t], h_ports[t],
                                           drop, n_ues, drop_idx)
        except (SchedulingError, PrecodingError, ValueError) as exc:
            results[t] = f"{type(exc).__name__}: {exc}"
    return results


def _drop_task(args):
    cfg, n_ues, drop_idx = args
    try:
        return n_ues, drop_idx, simulate_drop(cfg, n_ues, drop_idx), None
    except DropError as exc:
        return n_ues, drop_idx, None, f"DropError: {exc}"


_METRICS = ("cell_se_bps_hz", "avg_ue_tput_mbps", "sinr_db_p5", "sinr_db_p50",
            "sinr_db_p95", "mean_layers")


def _aggregate(values: list) -> dict:
    arr = np.array(values, dtype=float)
    stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return {
        "mean": float(arr.mean()), "stderr": stderr,
        "p5": float(np.percentile(arr, 5)),
        "p50": float(np.percentile(arr, 50)),
        "p95": float(np.percentile(arr, 95)),
        "n": int(len(arr)),
    }


def run_sweep(cfg: ScenarioConfig, workers: int = 1) -> RunResult:
    tasks = [(cfg, u, d) for u in cfg.n_per_sector for d in range(cfg.n_drops)]
    if workers > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            raw = pool.map(_drop_task, tasks)
    else:
        raw = [_drop_task(t) for t in tasks]

    per_cell: dict = {(t, u): [] for u in cfg.n_per_sector for t in cfg.types}
    failures = []
    for n_ues, drop_idx, results, err in raw:
        if err is not None:
            failures.append({"n_ues": n_ues, "drop": drop_idx, "error": err})
            continue
        for t, sample in results.items():
            if isinstance(sample, str):
                failures.append({"array_type": t, "n_ues": n_ues,
                                 "drop": drop_idx, "error": sample})
            else:
                per_cell[(t, n_ues)].append(sample)

    arrays = {t: build_array(t, cfg.array) for t in cfg.types}
    pa_params = _pa_params(cfg)
    blocks = _block_powers(cfg)
    cells = {}
    for (t, u), samples in per_cell.items():
        if not samples:
            failures.append({"array_type": t, "n_ues": u,
                             "error": "no successful drops"})
            continue
        dbm = tx_power_for_load(u, cfg.phy.load_ref_n_ues, cfg.power.p_ref_dbm)
        breakdown = total_power(arrays[t], LoadPoint(u, dbm), blocks, pa_params)
        sample_lists = {m: [getattr(s, m) for s in samples] for m in _METRICS}
        aggregates = {m: _aggregate(v) for m, v in sample_lists.items()}
        mean_tput = aggregates["avg_ue_tput_mbps"]["mean"]
        ee = breakdown.total_w / (u * mean_tput) if mean_tput > 0 else None
        cells[(t, u)] = CellResult(
            array_type=t, n_ues=u, samples=sample_lists, aggregates=aggregates,
            power=breakdown, tx_power_dbm=dbm, ee_w_per_ue_mbps=ee)

    return RunResult(config=scenario_to_dict(cfg), cells=cells, failures=failures)


def perf_table(result: RunResult) -> PerfTable:
    entries = {}
    for (t, u), cell in result.cells.items():
        entries[(t, u)] = PerfPoint(
            cell_se_bps_hz=cell.aggregates["cell_se_bps_hz"]["mean"],
            ue_tput_mbps=cell.aggregates["avg_ue_tput_mbps"]["mean"],
            total_power_w=cell.power.total_w,
            ee_w_per_ue_mbps=cell.ee_w_per_ue_mbps)
    return PerfTable(entries)


def _csv_rows(result: RunResult, family: str):
    rows = []
    for (t, u) in sorted(result.cells):
        cell = result.cells[(t, u)]
        if family == "se_vs_ues":
            agg = cell.aggregates["cell_se_bps_hz"]
            rows.append((t, u, "cell_se_bps_hz", agg["mean"], agg["stderr"]))
        elif family == "tput_vs_ues":
            agg = cell.aggregates["avg_ue_tput_mbps"]
            rows.append((t, u, "avg_ue_tput_mbps", agg["mean"], agg["stderr"]))
            se = cell.aggregates["cell_se_bps_hz"]
            bw_mhz = result.config["bandwidth_mhz"]
            rows.append((t, u, "cell_tput_mbps", se["mean"] * bw_mhz, se["stderr"] * bw_mhz))
        elif family == "power_breakdown":
            p = cell.power
            for metric, val in (("tx_conv_w", p.tx_conv_total_w),
                                ("rx_conv_w", p.rx_conv_total_w),
                                ("pa_w", p.pa_total_w), ("lna_w", p.lna_total_w),
                                ("total_w", p.total_w)):
                rows.append((t, u, metric, val, 0.0))
        elif family == "ee":
            if cell.ee_w_per_ue_mbps is not None:
                rows.append((t, u, "ee_w_per_ue_mbps", cell.ee_w_per_ue_mbps, 0.0))
    return rows


def emit_reports(result: RunResult, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for family in ("se_vs_ues", "tput_vs_ues", "power_breakdown", "ee"):
        path = out / f"{family}.csv"
        lines = ["array_type,n_ues,metric,value,stderr"]
        for t, u, metric, value, stderr in _csv_rows(result, family):
            lines.append(f"{t},{u},{metric},{value!r},{stderr!r}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)

    pt_path = out / "perf_table.json"
    pt_path.write_text(perf_table(result).to_json() + "\n")
    written.append(pt_path)

    cells_doc = {}
    for (t, u), cell in sorted(result.cells.items()):
        cells_doc[f"{t}:{u}"] = {
            "array_type": t, "n_ues": u, "samples": cell.samples,
            "aggregates": cell.aggregates,
            "power_w": {
                "tx_conv": cell.power.tx_conv_total_w,
                "rx_conv": cell.power.rx_conv_total_w,
                "pa": cell.power.pa_total_w, "lna": cell.power.lna_total_w,
                "total": cell.power.total_w,
            },
            "tx_power_dbm": cell.tx_power_dbm,
            "ee_w_per_ue_mbps": cell.ee_w_per_ue_mbps,
        }
    summary = {"config": result.config, "cells": cells_doc,
               "failures": result.failures}
    sum_path = out / "summary.json"
    sum_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(sum_path)

    cfg_path = out / "effective_config.yaml"
    cfg_path.write_text(yaml.safe_dump(result.config, sort_keys=True))
    written.append(cfg_path)
    return written
