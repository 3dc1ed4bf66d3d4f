"""Command-line entry point: simulate, sweep, power, adapt."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .adapt import PerfTable, savings_report, select_config, tx_power_for_load
from .arrays import ARRAY_TYPES, build_array
from .config import ConfigError, ScenarioConfig, load_scenario
from .power import LoadPoint, PaParams, SaturationError, total_power
from .runner import emit_reports, run_sweep


def _load_cfg(args) -> ScenarioConfig:
    cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _run_and_report(cfg: ScenarioConfig, out_dir: Path, workers: int) -> int:
    result = run_sweep(cfg, workers=workers)
    paths = emit_reports(result, out_dir)
    for (t, u) in sorted(result.cells):
        cell = result.cells[(t, u)]
        agg = cell.aggregates
        ee = cell.ee_w_per_ue_mbps
        print(f"{t} n_ues={u:<3d} cell_se={agg['cell_se_bps_hz']['mean']:7.2f} "
              f"b/s/Hz  ue_tput={agg['avg_ue_tput_mbps']['mean']:7.2f} Mb/s  "
              f"power={cell.power.total_w:7.2f} W  "
              f"ee={ee if ee is None else round(ee, 4)}")
    for f in result.failures:
        print(f"FAILED: {f}", file=sys.stderr)
    print(f"reports written to {paths[0].parent}")
    return 1 if result.failures else 0


def _cmd_simulate(args) -> int:
    return _run_and_report(_load_cfg(args), args.out, args.workers)


def _cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    overrides = {}
    if args.types:
        overrides["types"] = tuple(args.types.split(","))
    if args.ues:
        overrides["n_per_sector"] = tuple(int(u) for u in args.ues.split(","))
    if args.drops is not None:
        overrides["n_drops"] = args.drops
    if args.blocks is not None:
        overrides["n_blocks"] = args.blocks
    cfg = dataclasses.replace(cfg, **overrides)
    return _run_and_report(cfg, args.out, args.workers)


def _cmd_power(args) -> int:
    types = args.type.split(",")
    dbms = [float(x) for x in args.dbm.split(",")]
    if len(dbms) == 1:
        dbms = dbms * len(types)
    if len(types) != len(dbms):
        print("--type and --dbm lists must have matching lengths", file=sys.stderr)
        return 2
    params = PaParams()
    print(f"{'type':<5}{'dBm':>7}{'tx_conv':>10}{'rx_conv':>10}"
          f"{'pa':>10}{'lna':>10}{'total':>10}  [W]")
    for t, dbm in zip(types, dbms):
        arr = build_array(t)
        p = total_power(arr, LoadPoint(0, dbm), params=params)
        print(f"{t:<5}{dbm:>7.2f}{p.tx_conv_total_w:>10.2f}{p.rx_conv_total_w:>10.2f}"
              f"{p.pa_total_w:>10.2f}{p.lna_total_w:>10.2f}{p.total_w:>10.2f}")
    return 0


def _decide(load: int, target: float | None, table: PerfTable, args) -> dict:
    if target is None:
        # Default target: the reference type's per-UE throughput at full load.
        point, _ = table.lookup("A", args.ref_load)
        target = point.ue_tput_mbps
    decision = select_config(load, target, table)
    arrays = {t: build_array(t) for t in ARRAY_TYPES}
    report = savings_report(decision, arrays, n_ref=args.ref_load)
    return {"decision": dataclasses.asdict(decision), "savings": report}


def _cmd_adapt(args) -> int:
    table = PerfTable.from_json(Path(args.table).read_text())
    if args.trace:
        loads = [int(line) for line in Path(args.trace).read_text().split()]
        for load in loads:
            print(json.dumps(_decide(load, args.target, table, args), sort_keys=True))
    else:
        if args.load is None:
            print("either --load or --trace is required", file=sys.stderr)
            return 2
        print(json.dumps(_decide(args.load, args.target, table, args),
                         indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmimo-ee",
        description="Massive MIMO energy-efficiency simulator and power model")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the configured Monte Carlo sweep")
    sim.add_argument("--scenario", type=Path, help="YAML scenario file")
    sim.add_argument("--seed", type=int, help="override the scenario seed")
    sim.add_argument("--out", type=Path, required=True, help="report directory")
    sim.add_argument("--workers", type=int, default=1)
    sim.set_defaults(func=_cmd_simulate)

    sw = sub.add_parser("sweep", help="simulate with grid overrides")
    sw.add_argument("--scenario", type=Path)
    sw.add_argument("--types", help="comma list, e.g. A,E,F,K,L")
    sw.add_argument("--ues", help="comma list, e.g. 1,2,4,8,12,16")
    sw.add_argument("--drops", type=int)
    sw.add_argument("--blocks", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--out", type=Path, required=True)
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=_cmd_sweep)

    pw = sub.add_parser("power", help="front-end power breakdown table")
    pw.add_argument("--type", required=True, help="array type(s), comma list")
    pw.add_argument("--dbm", required=True, help="total TX power(s), comma list")
    pw.set_defaults(func=_cmd_power)

    ad = sub.add_parser("adapt", help="array selection for a given load")
    ad.add_argument("--table", required=True, help="perf_table.json from a sweep")
    ad.add_argument("--load", type=int, help="number of active UEs")
    ad.add_argument("--target", type=float, help="per-UE throughput target, Mb/s")
    ad.add_argument("--trace", type=Path, help="file of loads, one per line")
    ad.add_argument("--ref-load", type=int, default=16, dest="ref_load")
    ad.set_defaults(func=_cmd_adapt)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SaturationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
