"""Massive MIMO downlink system simulator with an analog front-end power
model and load-adaptive array reconfiguration."""

from .arrays import (ARRAY_TYPES, CATALOG, ArrayConfig, ArrayGeometry,
                     ElementPattern, FeederNetwork, build_array,
                     element_gain_db, feeder_matrix, port_array_response)
from .adapt import (AdaptDecision, PerfPoint, PerfTable, savings_report,
                    select_config, tx_power_for_load)
from .channel import (ChannelParams, ChannelRealization, LinkState, UeDrop,
                      drop_ues, link_state, realize_channel)
from .config import ConfigError, ScenarioConfig, load_scenario, scenario_from_dict
from .mumimo import (LinkMetrics, Precoder, ScheduleDecision, dl_sinr,
                     sector_metrics, sus_schedule, truncated_shannon_se,
                     zf_precode)
from .network import NetworkLayout, build_layout
from .power import (BlockPowers, LoadPoint, PaParams, PowerBreakdown,
                    backoff_db, energy_efficiency, pa_dc_power, pa_efficiency,
                    per_element_tx_power, total_power)
from .runner import RunResult, emit_reports, perf_table, run_sweep
from .sounding import (ChannelEstimate, PilotPlan, UlPowerControl,
                       assign_pilots, estimate_channels, pilot_tx_psd)

__version__ = "0.1.0"
