"""Greedy semi-orthogonal scheduling, ZF precoding, DL SINR and rates.

One layer per scheduled UE; the UE antenna with the larger estimated
norm carries the layer (no receive combining).  Equal power per layer is
assumed both inside the scheduler objective and in the final precoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sounding import ChannelEstimate


class SchedulingError(RuntimeError):
    pass


class PrecodingError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ScheduleDecision:
    ue_indices: np.ndarray   # (K,) in selection order
    antennas: np.ndarray     # (K,) chosen UE antenna per layer
    rows: np.ndarray         # (K, P) estimated effective channel rows


@dataclass(frozen=True, eq=False)
class Precoder:
    w: np.ndarray            # (P, K), unit-norm columns
    per_layer_power_w: float


def zf_precode(h_hat_rows: np.ndarray, sector_power_w: float,
               cond_threshold: float = 1e8) -> Precoder:
    """Pseudoinverse precoder with unit-norm columns and equal layer power."""
    rows = np.atleast_2d(h_hat_rows)
    k, p = rows.shape
    if k > p:
        raise PrecodingError(f"{k} layers exceed {p} ports")
    if np.linalg.cond(rows) > cond_threshold:
        raise PrecodingError("rank-deficient channel matrix")
    w = np.linalg.pinv(rows)
    w = w / np.linalg.norm(w, axis=0, keepdims=True)
    return Precoder(w=w, per_layer_power_w=sector_power_w / k)


def truncated_shannon_se(sinr, cap: float = 8.0):
    """Spectral efficiency per layer, capped by the highest modulation format."""
    se = np.minimum(np.log2(1.0 + np.asarray(sinr, dtype=float)), cap)
    return se if se.shape else float(se)


def _zf_sum_se(rows: np.ndarray, sector_power_w: float, noise_w: float,
               se_cap: float) -> float:
    """Scheduler objective: interference-free ZF throughput on the estimates."""
    try:
        pre = zf_precode(rows, sector_power_w)
    except PrecodingError:
        return -np.inf
    gains = np.abs(np.einsum("kp,pk->k", rows, pre.w)) ** 2
    return float(np.sum(truncated_shannon_se(pre.per_layer_power_w * gains / noise_w, se_cap)))


def sus_schedule(estimates: list[ChannelEstimate], k_max: int, alpha: float,
                 sector_power_w: float, noise_w: float,
                 se_cap: float = 8.0) -> ScheduleDecision:
    """Greedy semi-orthogonal user selection.

    Each round picks the candidate with the largest channel component
    orthogonal to the span of the already-selected rows, keeps only
    candidates whose normalized projection onto that span stays below
    `alpha`, and stops early if the estimated equal-power ZF throughput
    would decrease.
    """
    if not estimates:
        raise SchedulingError("no channel estimates to schedule from")
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must be in (0, 1]")

    ants = np.array([int(np.argmax(np.linalg.norm(e.h_hat_port, axis=1)))
                     for e in estimates])
    cand = np.array([e.h_hat_port[a] for e, a in zip(estimates, ants)])
    norms2 = np.einsum("kp,kp->k", cand, cand.conj()).real

    selected: list[int] = []
    basis: list[np.ndarray] = []
    pool = list(range(len(estimates)))
    best_sum_se = 0.0

    while pool and len(selected) < k_max:
        resid2 = np.empty(len(pool))
        for i, c in enumerate(pool):
            r = cand[c]
            for q in basis:
                r = r - (r @ q.conj()) * q
            resid2[i] = np.real(r @ r.conj())
        pick = pool[int(np.argmax(resid2))]

        trial = selected + [pick]
        sum_se = _zf_sum_se(cand[trial], sector_power_w, noise_w, se_cap)
        if sum_se <= best_sum_se:
            break
        best_sum_se = sum_se
        selected.append(pick)

        r = cand[pick]
        for q in basis:
            r = r - (r @ q.conj()) * q
        basis.append(r / np.linalg.norm(r))

        kept = []
        for c in pool:
            if c == pick:
                continue
            proj2 = sum(abs(cand[c] @ q.conj()) ** 2 for q in basis)
            if np.sqrt(proj2 / norms2[c]) < alpha:
                kept.append(c)
        pool = kept

    sel = np.array(selected, dtype=int)
    return ScheduleDecision(
        ue_indices=np.array([estimates[i].ue for i in sel], dtype=int),
        antennas=ants[sel],
        rows=cand[sel],
    )


def dl_sinr(h_rows_by_sector, schedules, precoders, noise_w: float):
    """Per-scheduled-UE DL SINR with full inter-cell interference.

    h_rows_by_sector[c] is (K_c, S, P): the true port-channel row of each
    UE scheduled in sector c toward every sector, on its serving antenna.
    Returns a list of (K_c,) linear SINR arrays, one per sector.
    """
    n_sectors = len(schedules)
    out = []
    for c in range(n_sectors):
        if schedules[c] is None or len(schedules[c].ue_indices) == 0:
            out.append(np.zeros(0))
            continue
        rows = h_rows_by_sector[c]
        k_c = rows.shape[0]
        signal = np.zeros(k_c)
        interf = np.zeros(k_c)
        for cp in range(n_sectors):
            if precoders[cp] is None:
                continue
            g2 = np.abs(rows[:, cp, :] @ precoders[cp].w) ** 2 * precoders[cp].per_layer_power_w
            if cp == c:
                signal = np.diag(g2).copy()
                interf += g2.sum(axis=1) - signal
            else:
                interf += g2.sum(axis=1)
        out.append(signal / (interf + noise_w))
    return out


@dataclass(frozen=True, eq=False)
class LinkMetrics:
    sinr_db: np.ndarray
    se_bps_hz: np.ndarray
    throughput_mbps: np.ndarray
    cell_se_bps_hz: float
    avg_ue_throughput_mbps: float | None


def sector_metrics(sinr_linear: np.ndarray, bandwidth_hz: float,
                   overhead_fraction: float, se_cap: float = 8.0) -> LinkMetrics:
    """Throughput bookkeeping for one sector and coherence block."""
    if not (0.0 <= overhead_fraction < 1.0):
        raise ValueError("overhead_fraction must be in [0, 1)")
    sinr = np.asarray(sinr_linear, dtype=float)
    se = np.atleast_1d(truncated_shannon_se(sinr, se_cap))
    data_frac = 1.0 - overhead_fraction
    tput = bandwidth_hz * se * data_frac / 1e6
    with np.errstate(divide="ignore"):
        sinr_db = 10.0 * np.log10(np.maximum(sinr, 1e-300))
    return LinkMetrics(
        sinr_db=sinr_db,
        se_bps_hz=se,
        throughput_mbps=tput,
        cell_se_bps_hz=float(se.sum() * data_frac),
        avg_ue_throughput_mbps=float(tput.mean()) if se.size else None,
    )
