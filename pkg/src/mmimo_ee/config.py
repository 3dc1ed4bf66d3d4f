"""Scenario configuration: YAML schema, defaults, validation, echo.

An empty file yields the default scenario (500 m ISD, 7x3 sectors,
2 GHz / 10 MHz, full type and load grid).  Unknown keys are rejected
with their full key path; the effective configuration is echoed to the
output directory for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .arrays import ARRAY_TYPES, ArrayGeometry, ElementPattern
from .channel import ChannelParams
from .power import DEFAULT_EFF_TABLE
from .sounding import UlPowerControl


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SchedConfig:
    alpha: float = 0.5
    k_max: int | None = None      # None -> min(ports, active UEs)


@dataclass(frozen=True)
class PhyConfig:
    se_cap: float = 8.0
    overhead: float = 1.0 / 14.0  # one UL pilot symbol per 14-symbol subframe
    bs_power_dbm: dict = field(default_factory=lambda: {256: 43.0, 128: 40.0, 64: 37.0})
    ue_noise_figure_db: float = 9.0
    scale_power_with_load: bool = False
    load_ref_n_ues: int = 16


@dataclass(frozen=True)
class PowerConfig:
    eff_table: tuple = DEFAULT_EFF_TABLE
    preamp_w: float = 0.5
    loss_factor: float = 0.0      # 0 -> calibrated from the PA anchor
    duty_cycle: float = 0.75
    peak_pa_w: float = 4.70
    p_ref_dbm: float = 53.0
    pa_anchor_w: float = 2.07
    lna_w: float = 0.28
    tx_conv_w: float = 2.34
    rx_conv_w: float = 0.9


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1
    n_drops: int = 20
    n_blocks: int = 4
    types: tuple = ARRAY_TYPES
    n_per_sector: tuple = (1, 2, 4, 8, 12, 16)
    isd_m: float = 500.0
    bs_height_m: float = 25.0
    carrier_ghz: float = 2.0
    bandwidth_mhz: float = 10.0
    drop_max_attempts: int = 20000
    array: ArrayGeometry = field(default_factory=ArrayGeometry)
    channel: ChannelParams = field(default_factory=ChannelParams)
    ul: UlPowerControl = field(default_factory=UlPowerControl)
    ul_bs_noise_figure_db: float = 5.0
    sched: SchedConfig = field(default_factory=SchedConfig)
    phy: PhyConfig = field(default_factory=PhyConfig)
    power: PowerConfig = field(default_factory=PowerConfig)


def _check(cond: bool, path: str, msg: str):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


class _Section:
    """Pops known keys off a raw dict, complaining about leftovers."""

    def __init__(self, raw: dict, prefix: str = ""):
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{prefix or 'top level'}: expected a mapping")
        self.raw = dict(raw)
        self.prefix = prefix

    def path(self, key: str) -> str:
        return f"{self.prefix}.{key}" if self.prefix else key

    def take(self, key: str, default, caster=None):
        if key not in self.raw:
            return default
        val = self.raw.pop(key)
        if caster is None:
            return val
        try:
            return caster(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.path(key)}: {exc}") from exc

    def sub(self, key: str) -> "_Section":
        return _Section(self.raw.pop(key, {}), self.path(key))

    def done(self):
        if self.raw:
            key = sorted(self.raw)[0]
            raise ConfigError(f"unknown key '{self.path(key)}'")


def _int_list(val) -> tuple:
    items = val if isinstance(val, (list, tuple)) else [val]
    return tuple(int(v) for v in items)


def _str_list(val) -> tuple:
    items = val if isinstance(val, (list, tuple)) else [val]
    return tuple(str(v) for v in items)


def scenario_from_dict(data: dict) -> ScenarioConfig:
    top = _Section(data)

    seed = top.take("seed", 1, int)
    n_drops = top.take("n_drops", 20, int)
    n_blocks = top.take("n_blocks", 4, int)
    types = top.take("types", ARRAY_TYPES, _str_list)
    n_per_sector = top.take("n_per_sector", (1, 2, 4, 8, 12, 16), _int_list)
    isd_m = top.take("isd_m", 500.0, float)
    bs_height_m = top.take("bs_height_m", 25.0, float)
    carrier_ghz = top.take("carrier_ghz", 2.0, float)
    bandwidth_mhz = top.take("bandwidth_mhz", 10.0, float)
    drop_max_attempts = top.take("drop_max_attempts", 20000, int)

    arr = top.sub("array")
    pattern = ElementPattern(
        hpbw_az=arr.take("hpbw_az_deg", 60.0, float),
        hpbw_el=arr.take("hpbw_el_deg", 60.0, float),
        max_gain=arr.take("element_gain_dbi", 8.0, float),
        front_back_ratio=arr.take("front_back_db", 30.0, float),
    )
    geometry = ArrayGeometry(
        grid_cols=arr.take("grid_cols", 8, int),
        grid_rows=arr.take("grid_rows", 4, int),
        spacing_h_lambda=arr.take("spacing_h_lambda", 0.5, float),
        spacing_v_lambda=arr.take("spacing_v_lambda", 0.5, float),
        downtilt_deg=arr.take("downtilt_deg", 12.0, float),
        pattern=pattern,
    )
    arr.done()

    ch = top.sub("channel")
    channel = ChannelParams(
        carrier_ghz=carrier_ghz,
        n_clusters_los=ch.take("n_clusters_los", 8, int),
        n_clusters_nlos=ch.take("n_clusters_nlos", 12, int),
        n_rays=ch.take("n_rays", 10, int),
        asd_deg=ch.take("asd_deg", 30.0, float),
        zsd_deg=ch.take("zsd_deg", 8.0, float),
        ray_asd_deg=ch.take("ray_asd_deg", 5.0, float),
        ray_zsd_deg=ch.take("ray_zsd_deg", 2.0, float),
        xpr_db=ch.take("xpr_db", 8.0, float),
        delay_scale_ns=ch.take("delay_scale_ns", 100.0, float),
        cluster_shadow_sigma_db=ch.take("cluster_shadow_sigma_db", 3.0, float),
        pl_los=tuple(ch.take("pl_los", (28.0, 22.0, 20.0), lambda v: [float(x) for x in v])),
        pl_nlos=tuple(ch.take("pl_nlos", (14.4, 39.1, 20.0), lambda v: [float(x) for x in v])),
        shadow_sigma_los_db=ch.take("shadow_sigma_los_db", 4.0, float),
        shadow_sigma_nlos_db=ch.take("shadow_sigma_nlos_db", 6.0, float),
        ue_height_m=ch.take("ue_height_m", 1.5, float),
        min_dist_m=ch.take("min_dist_m", 35.0, float),
    )
    ch.done()

    ul_sec = top.sub("ul")
    ul = UlPowerControl(
        coverage_fraction=ul_sec.take("coverage_fraction", 0.9, float),
        max_psd_dbm_per_10mhz=ul_sec.take("max_psd_dbm_10mhz", 23.0, float),
    )
    ul_bs_nf = ul_sec.take("bs_noise_figure_db", 5.0, float)
    ul_sec.done()

    sc = top.sub("sched")
    k_max_raw = sc.take("k_max", None)
    sched = SchedConfig(
        alpha=sc.take("alpha", 0.5, float),
        k_max=None if k_max_raw in (None, "null") else int(k_max_raw),
    )
    sc.done()

    ph = top.sub("phy")
    phy = PhyConfig(
        se_cap=ph.take("se_cap", 8.0, float),
        overhead=ph.take("overhead", 1.0 / 14.0, float),
        bs_power_dbm=ph.take("bs_power_dbm", {256: 43.0, 128: 40.0, 64: 37.0},
                             lambda v: {int(k): float(x) for k, x in v.items()}),
        ue_noise_figure_db=ph.take("ue_noise_figure_db", 9.0, float),
        scale_power_with_load=ph.take("scale_power_with_load", False, bool),
        load_ref_n_ues=ph.take("load_ref_n_ues", 16, int),
    )
    ph.done()

    pw = top.sub("power")
    blocks_sec = pw.sub("blocks")
    power = PowerConfig(
        eff_table=tuple(pw.take("eff_table", DEFAULT_EFF_TABLE,
                                lambda v: [(float(a), float(b)) for a, b in v])),
        preamp_w=pw.take("preamp_w", 0.5, float),
        loss_factor=pw.take("loss_factor", 0.0, float),
        duty_cycle=pw.take("duty_cycle", 0.75, float),
        peak_pa_w=pw.take("peak_pa_w", 4.70, float),
        p_ref_dbm=pw.take("p_ref_dbm", 53.0, float),
        pa_anchor_w=blocks_sec.take("pa_anchor_w", 2.07, float),
        lna_w=blocks_sec.take("lna_w", 0.28, float),
        tx_conv_w=blocks_sec.take("tx_conv_w", 2.34, float),
        rx_conv_w=blocks_sec.take("rx_conv_w", 0.9, float),
    )
    blocks_sec.done()
    pw.done()
    top.done()

    cfg = ScenarioConfig(
        seed=seed, n_drops=n_drops, n_blocks=n_blocks, types=types,
        n_per_sector=n_per_sector, isd_m=isd_m, bs_height_m=bs_height_m,
        carrier_ghz=carrier_ghz, bandwidth_mhz=bandwidth_mhz,
        drop_max_attempts=drop_max_attempts, array=geometry, channel=channel,
        ul=ul, ul_bs_noise_figure_db=ul_bs_nf, sched=sched, phy=phy, power=power,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig):
    _check(cfg.n_drops >= 1, "n_drops", "must be >= 1")
    _check(cfg.n_blocks >= 1, "n_blocks", "must be >= 1")
    _check(cfg.isd_m > 0, "isd_m", "must be positive")
    _check(cfg.bandwidth_mhz > 0, "bandwidth_mhz", "must be positive")
    _check(cfg.carrier_ghz > 0, "carrier_ghz", "must be positive")
    _check(len(cfg.types) > 0, "types", "must list at least one array type")
    for t in cfg.types:
        _check(t in ARRAY_TYPES, "types", f"unknown array type {t!r}")
    _check(len(cfg.n_per_sector) > 0, "n_per_sector", "must list at least one load")
    for n in cfg.n_per_sector:
        _check(n >= 1, "n_per_sector", f"loads must be >= 1, got {n}")
        _check(n <= cfg.phy.load_ref_n_ues, "n_per_sector",
               f"load {n} exceeds phy.load_ref_n_ues={cfg.phy.load_ref_n_ues}")
    _check(0.0 < cfg.sched.alpha <= 1.0, "sched.alpha", "must be in (0, 1]")
    _check(cfg.sched.k_max is None or cfg.sched.k_max >= 1, "sched.k_max",
           "must be >= 1 or null")
    _check(0.0 < cfg.ul.coverage_fraction < 1.0, "ul.coverage_fraction",
           "must be in (0, 1)")
    _check(0.0 <= cfg.phy.overhead < 1.0, "phy.overhead", "must be in [0, 1)")
    _check(0.0 < cfg.power.duty_cycle <= 1.0, "power.duty_cycle", "must be in (0, 1]")
    _check(cfg.channel.n_rays >= 1, "channel.n_rays", "must be >= 1")
    _check(cfg.channel.min_dist_m >= 0, "channel.min_dist_m", "must be >= 0")
    _check(cfg.channel.min_dist_m < cfg.isd_m / 2, "channel.min_dist_m",
           "must be smaller than half the inter-site distance")


def load_scenario(path: str | Path) -> ScenarioConfig:
    text = Path(path).read_text()
    data = yaml.safe_load(text)
    if data is None:
        data = {}
    return scenario_from_dict(data)


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Effective configuration, including the realized array catalog."""
    from .arrays import CATALOG, build_array

    catalog = []
    for t in cfg.types:
        a = build_array(t, cfg.array)
        catalog.append({
            "type": t, "n_elements": a.n_elements, "n_ports": a.n_ports,
            "subarray_size": a.subarray_size,
            "spacing_h_lambda": cfg.array.spacing_h_lambda,
            "spacing_v_lambda": cfg.array.spacing_v_lambda,
            "downtilt_deg": cfg.array.downtilt_deg,
            "element_gain_dbi": cfg.array.pattern.max_gain,
        })
    return {
        "seed": cfg.seed, "n_drops": cfg.n_drops, "n_blocks": cfg.n_blocks,
        "types": list(cfg.types), "n_per_sector": list(cfg.n_per_sector),
        "isd_m": cfg.isd_m, "bs_height_m": cfg.bs_height_m,
        "carrier_ghz": cfg.carrier_ghz, "bandwidth_mhz": cfg.bandwidth_mhz,
        "drop_max_attempts": cfg.drop_max_attempts,
        "array": {
            "grid_cols": cfg.array.grid_cols, "grid_rows": cfg.array.grid_rows,
            "spacing_h_lambda": cfg.array.spacing_h_lambda,
            "spacing_v_lambda": cfg.array.spacing_v_lambda,
            "downtilt_deg": cfg.array.downtilt_deg,
            "element_gain_dbi": cfg.array.pattern.max_gain,
            "hpbw_az_deg": cfg.array.pattern.hpbw_az,
            "hpbw_el_deg": cfg.array.pattern.hpbw_el,
            "front_back_db": cfg.array.pattern.front_back_ratio,
        },
        "array_catalog": catalog,
        "channel": {
            "n_clusters_los": cfg.channel.n_clusters_los,
            "n_clusters_nlos": cfg.channel.n_clusters_nlos,
            "n_rays": cfg.channel.n_rays,
            "asd_deg": cfg.channel.asd_deg, "zsd_deg": cfg.channel.zsd_deg,
            "ray_asd_deg": cfg.channel.ray_asd_deg,
            "ray_zsd_deg": cfg.channel.ray_zsd_deg,
            "xpr_db": cfg.channel.xpr_db,
            "delay_scale_ns": cfg.channel.delay_scale_ns,
            "cluster_shadow_sigma_db": cfg.channel.cluster_shadow_sigma_db,
            "pl_los": list(cfg.channel.pl_los), "pl_nlos": list(cfg.channel.pl_nlos),
            "shadow_sigma_los_db": cfg.channel.shadow_sigma_los_db,
            "shadow_sigma_nlos_db": cfg.channel.shadow_sigma_nlos_db,
            "ue_height_m": cfg.channel.ue_height_m,
            "min_dist_m": cfg.channel.min_dist_m,
        },
        "ul": {
            "coverage_fraction": cfg.ul.coverage_fraction,
            "max_psd_dbm_10mhz": cfg.ul.max_psd_dbm_per_10mhz,
            "bs_noise_figure_db": cfg.ul_bs_noise_figure_db,
        },
        "sched": {"alpha": cfg.sched.alpha, "k_max": cfg.sched.k_max},
        "phy": {
            "se_cap": cfg.phy.se_cap, "overhead": cfg.phy.overhead,
            "bs_power_dbm": dict(cfg.phy.bs_power_dbm),
            "ue_noise_figure_db": cfg.phy.ue_noise_figure_db,
            "scale_power_with_load": cfg.phy.scale_power_with_load,
            "load_ref_n_ues": cfg.phy.load_ref_n_ues,
        },
        "power": {
            "eff_table": [list(e) for e in cfg.power.eff_table],
            "preamp_w": cfg.power.preamp_w, "loss_factor": cfg.power.loss_factor,
            "duty_cycle": cfg.power.duty_cycle, "peak_pa_w": cfg.power.peak_pa_w,
            "p_ref_dbm": cfg.power.p_ref_dbm,
            "blocks": {
                "pa_anchor_w": cfg.power.pa_anchor_w, "lna_w": cfg.power.lna_w,
                "tx_conv_w": cfg.power.tx_conv_w, "rx_conv_w": cfg.power.rx_conv_w,
            },
        },
    }
