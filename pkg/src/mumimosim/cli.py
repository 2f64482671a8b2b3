"""Command-line front end: presets, config files, CSV output, plot scripts.

Config files are flat ``key = value`` text with ``[a, b, c]`` list syntax.
Precedence: built-in defaults < preset < config file < command-line flags.
Output is a headered CSV (one row per (mode, snr, mcs, ue) plus an ``all``
aggregate row) and a companion gnuplot script.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

from .sim import SimConfig, run_sweep

#: CSV header, fixed order.
CSV_COLUMNS = ("mode", "snr_db", "mcs", "ue", "bler", "bler_avg",
               "throughput_bps", "slots", "bits")

#: Config-file / flag key -> SimConfig field.
CONFIG_KEYS = {
    "num_rb": "num_rb",
    "scs_khz": "scs_khz",
    "snr_db": "snr_grid_db",
    "mcs": "mcs_list",
    "channel": "channel_mode",
    "sched": "scheduler_mode",
    "tb_per_point": "tb_per_point",
    "seed": "seed",
    "epsilon": "epsilon",
    "data_re_per_rb": "data_re_per_rb",
    "link_model": "link_model",
    "margin_db": "margin_db",
    "pilot_len": "pilot_len",
    "slots_per_drop": "slots_per_drop",
    "max_harq_attempts": "max_harq_attempts",
}

_SWEEP_MCS = (10, 16, 22, 28)

#: Experiment presets mirroring the evaluation figures.
PRESETS = {
    "bler-vs-snr": {
        "snr_grid_db": tuple(range(0, 42, 2)),
        "mcs_list": _SWEEP_MCS,
        "scheduler_mode": "mumimo",
    },
    "rate-vs-snr": {
        "snr_grid_db": tuple(range(0, 42, 2)),
        "mcs_list": _SWEEP_MCS,
        "scheduler_mode": "mumimo",
    },
    # compared against proportional fair in a second sweep, see run()
    "mu-vs-pf": {
        "snr_grid_db": tuple(range(0, 42, 2)),
        "mcs_list": _SWEEP_MCS,
        "scheduler_mode": "mumimo",
    },
    # 20 MHz / 52 RB radio profile
    "practical": {
        "num_rb": 52,
        "snr_grid_db": tuple(range(0, 42, 2)),
        "mcs_list": tuple(range(10, 17)),
        "scheduler_mode": "mumimo",
    },
}


class ConfigError(ValueError):
    """Bad key, bad value, or malformed config file."""


def _parse_scalar(text):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text.strip("'\"")


def _parse_value(text):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return ()
        return tuple(_parse_scalar(t) for t in inner.split(","))
    return _parse_scalar(text)


def load_config_file(path):
    """Parse a flat key = value config file into a SimConfig override dict."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    overrides = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        overrides[CONFIG_KEYS[key]] = _parse_value(value)
    return overrides


def parse_config(path=None, preset=None, flag_overrides=None):
    """Build a validated SimConfig from preset, file, and flag layers."""
    merged = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    if path is not None:
        merged.update(load_config_file(path))
    if flag_overrides:
        merged.update(flag_overrides)
    valid_fields = {f.name for f in dataclasses.fields(SimConfig)}
    for key in merged:
        if key not in valid_fields:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        return SimConfig(**merged).validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_snr_spec(text):
    """'MIN:MAX:STEP' inclusive sweep, or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) == 3:
            lo, hi, step = (float(p) for p in parts)
            if step <= 0 or hi < lo:
                raise ValueError
            n = int(round((hi - lo) / step))
            return tuple(lo + k * step for k in range(n + 1) if lo + k * step <= hi + 1e-9)
    except ValueError:
        pass
    raise ConfigError(f"bad --snr spec {text!r}, expected MIN:MAX:STEP")


def _parse_mcs_spec(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --mcs list {text!r}") from exc


def metrics_rows(metrics):
    """Flatten sweep metrics into CSV row tuples."""
    cfg = metrics.config
    rows = []
    for p in metrics.points:
        ue_ids = sorted(p.ue_blocks)
        for ue in ue_ids:
            rows.append((
                p.mode, p.snr_db, p.mcs_index, str(ue),
                p.bler(ue), p.bler_avg,
                p.throughput_bps(cfg.slot_duration_s, ue),
                p.slots, p.ue_bits_acked.get(ue, 0),
            ))
        rows.append((
            p.mode, p.snr_db, p.mcs_index, "all",
            p.bler_max, p.bler_avg,
            p.throughput_bps(cfg.slot_duration_s),
            p.slots, p.bits_acked,
        ))
    return rows


def write_csv(path, rows):
    lines = [",".join(CSV_COLUMNS)]
    for mode, snr, mcs, ue, bler, bler_avg, tput, slots, bits in rows:
        lines.append(
            f"{mode},{snr:g},{mcs},{ue},{bler:.6f},{bler_avg:.6f},"
            f"{tput:.3f},{slots},{bits}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


_PLOT_TEMPLATE = """\
# gnuplot script for {csv}
set datafile separator ','
set key autotitle columnhead outside
set grid
set xlabel 'SNR (dB)'

set ylabel 'BLER'
set logscale y
set output 'bler_vs_snr.png'
set term pngcairo size 900,600
plot for [m in "{mcs_values}"] '{csv}' \\
  using 2:($3==m && strcol(4) eq 'all' ? $6 : 1/0) with linespoints \\
  title sprintf('MCS %s', m)

unset logscale y
set ylabel 'Throughput (Mbit/s)'
set output 'rate_vs_snr.png'
plot for [m in "{mcs_values}"] '{csv}' \\
  using 2:($3==m && strcol(4) eq 'all' ? $7/1e6 : 1/0) with linespoints \\
  title sprintf('MCS %s', m)
"""


def write_plot_script(path, csv_path, mcs_list):
    script = _PLOT_TEMPLATE.format(
        csv=Path(csv_path).name,
        mcs_values=" ".join(str(m) for m in mcs_list),
    )
    Path(path).write_text(script)


def run(cfg, out_path, compare_pf=False, workers=1):
    """Execute the sweep(s) and write CSV + plot script next to `out_path`."""
    out_path = Path(out_path)
    if not out_path.parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {out_path.parent}")
    rows = metrics_rows(run_sweep(cfg, workers=workers))
    if compare_pf:
        pf_cfg = dataclasses.replace(cfg, scheduler_mode="pf")
        rows += metrics_rows(run_sweep(pf_cfg, workers=workers))
    plot_path = out_path.with_suffix(".gp")
    created = []
    try:
        write_csv(out_path, rows)
        created.append(out_path)
        write_plot_script(plot_path, out_path, cfg.mcs_list)
        created.append(plot_path)
    except OSError:
        for f in created:
            f.unlink(missing_ok=True)
        raise
    return out_path, plot_path


def build_arg_parser():
    parser = argparse.ArgumentParser(
        prog="mumimosim",
        description="Link-level MU-MIMO downlink simulator (2 TX antennas, 2 UEs).",
    )
    parser.add_argument("--config", metavar="PATH", help="flat key = value config file")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="experiment preset")
    parser.add_argument("--snr", metavar="MIN:MAX:STEP", help="SNR sweep in dB")
    parser.add_argument("--mcs", metavar="LIST", help="comma-separated MCS indices")
    parser.add_argument("--channel", choices=("ideal", "rayleigh"))
    parser.add_argument("--sched", choices=("mumimo", "pf", "su"))
    parser.add_argument("--rb", type=int, metavar="N", help="number of resource blocks")
    parser.add_argument("--seed", type=int, metavar="N")
    parser.add_argument("--tb-per-point", type=int, metavar="N",
                        help="transport blocks per UE per grid point")
    parser.add_argument("--out", metavar="PATH", default="results.csv")
    parser.add_argument("--link-model", choices=("bdd", "threshold"))
    parser.add_argument("--epsilon", type=float, metavar="X",
                        help="bit-error budget fraction for the bdd link model")
    parser.add_argument("--workers", type=int, default=1, metavar="N",
                        help="parallel processes for grid points")
    return parser


def _flag_overrides(args):
    overrides = {}
    if args.snr is not None:
        overrides["snr_grid_db"] = _parse_snr_spec(args.snr)
    if args.mcs is not None:
        overrides["mcs_list"] = _parse_mcs_spec(args.mcs)
    if args.channel is not None:
        overrides["channel_mode"] = args.channel
    if args.sched is not None:
        overrides["scheduler_mode"] = args.sched
    if args.rb is not None:
        overrides["num_rb"] = args.rb
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.tb_per_point is not None:
        overrides["tb_per_point"] = args.tb_per_point
    if args.link_model is not None:
        overrides["link_model"] = args.link_model
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    return overrides


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, args.preset, _flag_overrides(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        csv_path, plot_path = run(
            cfg, args.out, compare_pf=(args.preset == "mu-vs-pf"),
            workers=args.workers,
        )
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {csv_path} and {plot_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
