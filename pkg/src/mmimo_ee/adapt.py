"""Load-dependent transmit-power scaling and array-type selection.

The policy keeps per-UE transmit power constant as the number of active
UEs changes and, for a given load and throughput target, picks the
cheapest array type that still meets the target.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .arrays import CATALOG
from .power import BlockPowers, LoadPoint, PaParams, PowerBreakdown, total_power


class PolicyError(RuntimeError):
    pass


def tx_power_for_load(n_ues: int, n_ref: int, p_ref_dbm: float) -> float:
    """Total transmit power keeping per-UE power equal to the reference load."""
    if not 1 <= n_ues <= n_ref:
        raise ValueError(f"n_ues={n_ues} outside [1, {n_ref}]")
    return p_ref_dbm + 10.0 * np.log10(n_ues / n_ref)


@dataclass(frozen=True)
class PerfPoint:
    cell_se_bps_hz: float
    ue_tput_mbps: float
    total_power_w: float
    ee_w_per_ue_mbps: float | None


class PerfTable:
    """(array type, active UEs) -> simulated performance and power."""

    def __init__(self, entries: dict[tuple[str, int], PerfPoint]):
        self.entries = dict(entries)

    def loads_for(self, array_type: str) -> list[int]:
        return sorted(n for (t, n) in self.entries if t == array_type)

    def lookup(self, array_type: str, n_ues: int) -> tuple[PerfPoint, int]:
        """Point at the requested load, else at the nearest covered load."""
        loads = self.loads_for(array_type)
        if not loads:
            raise PolicyError(f"table has no entries for type {array_type}")
        nearest = min(loads, key=lambda n: (abs(n - n_ues), n))
        return self.entries[(array_type, nearest)], nearest

    def to_json(self) -> str:
        rows = [{"array_type": t, "n_ues": n, **asdict(p)}
                for (t, n), p in sorted(self.entries.items())]
        return json.dumps({"perf_table": rows}, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PerfTable":
        data = json.loads(text)
        entries = {}
        for row in data["perf_table"]:
            entries[(row["array_type"], int(row["n_ues"]))] = PerfPoint(
                cell_se_bps_hz=row["cell_se_bps_hz"],
                ue_tput_mbps=row["ue_tput_mbps"],
                total_power_w=row["total_power_w"],
                ee_w_per_ue_mbps=row["ee_w_per_ue_mbps"],
            )
        return cls(entries)


@dataclass(frozen=True)
class AdaptDecision:
    n_active_ues: int
    target_tput_mbps: float
    chosen_type: str
    predicted_ue_tput_mbps: float
    predicted_power_w: float
    target_met: bool
    load_used: int            # table load backing the prediction
    interpolated: bool        # True when no exact-load entry existed


def select_config(n_active_ues: int, target_tput_mbps: float, table: PerfTable,
                  types: tuple[str, ...] = tuple(CATALOG)) -> AdaptDecision:
    """Cheapest type meeting the throughput target at this load.

    Ties break toward fewer elements, then fewer ports.  If nothing
    qualifies the highest-throughput type is returned flagged as
    target-unmet.
    """
    if not table.entries:
        raise PolicyError("empty performance table")
    rows = []
    for t in types:
        point, load = table.lookup(t, n_active_ues)
        rows.append((t, point, load))

    feasible = [r for r in rows if r[1].ue_tput_mbps >= target_tput_mbps]
    if feasible:
        t, point, load = min(
            feasible,
            key=lambda r: (r[1].total_power_w, CATALOG[r[0]][0], CATALOG[r[0]][1]))
        met = True
    else:
        t, point, load = max(rows, key=lambda r: r[1].ue_tput_mbps)
        met = False
    return AdaptDecision(
        n_active_ues=n_active_ues, target_tput_mbps=target_tput_mbps,
        chosen_type=t, predicted_ue_tput_mbps=point.ue_tput_mbps,
        predicted_power_w=point.total_power_w, target_met=met,
        load_used=load, interpolated=(load != n_active_ues),
    )


def _fractions(chosen: PowerBreakdown, ref: PowerBreakdown) -> dict:
    def frac(a, b):
        return (b - a) / b if b > 0 else 0.0
    return {
        "tx_conv": frac(chosen.tx_conv_total_w, ref.tx_conv_total_w),
        "rx_conv": frac(chosen.rx_conv_total_w, ref.rx_conv_total_w),
        "pa": frac(chosen.pa_total_w, ref.pa_total_w),
        "lna": frac(chosen.lna_total_w, ref.lna_total_w),
        "total": frac(chosen.total_w, ref.total_w),
    }


def savings_report(decision: AdaptDecision, arrays: dict, p_ref_dbm: float = 53.0,
                   n_ref: int = 16, reference_type: str = "A",
                   blocks: BlockPowers | None = None,
                   params: PaParams | None = None) -> dict:
    """Per-block and total savings of the chosen configuration.

    Reported against two baselines: the reference type at full power, and
    the reference type scaled to the decision's load.
    """
    blocks = blocks or BlockPowers()
    params = params or PaParams()
    dbm = tx_power_for_load(decision.n_active_ues, n_ref, p_ref_dbm)
    chosen = total_power(arrays[decision.chosen_type],
                         LoadPoint(decision.n_active_ues, dbm), blocks, params)
    ref_full = total_power(arrays[reference_type], LoadPoint(n_ref, p_ref_dbm),
                           blocks, params)
    ref_same = total_power(arrays[reference_type],
                           LoadPoint(decision.n_active_ues, dbm), blocks, params)
    return {
        "chosen_type": decision.chosen_type,
        "n_active_ues": decision.n_active_ues,
        "tx_power_dbm": dbm,
        "chosen_power_w": chosen.total_w,
        "vs_reference_full_load": _fractions(chosen, ref_full),
        "vs_reference_same_load": _fractions(chosen, ref_same),
        "reference_full_load_w": ref_full.total_w,
        "reference_same_load_w": ref_same.total_w,
    }
