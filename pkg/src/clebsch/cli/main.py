"""Command line: ``run``, ``sweep``, ``check`` and ``plotscript``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConstraintViolation, HypothesisViolation, NonConvergence, SingularMetric
from .config import ConfigError, load_config, normalized
from .scenarios import CSV_NAME, output_root, simulate, sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

PLOT_TEMPLATE = '''"""Plot the time series written by a clebsch run (needs matplotlib)."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
with open(here / "{csv}", newline="") as fh:
    rows = list(csv.reader(fh))
header, data = rows[0], [[float(x) for x in r] for r in rows[1:]]
cols = {{name: [r[i] for r in data] for i, name in enumerate(header)}}
names = [n for n in header if n != "t"]
fig, axes = plt.subplots(len(names), 1, sharex=True, figsize=(7, 1.8 * len(names)))
for ax, name in zip(axes if len(names) > 1 else [axes], names):
    ax.plot(cols["t"], cols[name])
    ax.set_ylabel(name)
axes[-1].set_xlabel("t") if len(names) > 1 else axes.set_xlabel("t")
fig.tight_layout()
out = here / "timeseries.png"
fig.savefig(out, dpi=120)
print(out)
if "--show" in sys.argv:
    plt.show()
'''


def _parse_dts(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dt expects comma-separated numbers, got {text!r}") from None
    if len(values) < 3:
        raise argparse.ArgumentTypeError("--dt needs at least three values")
    if any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("--dt values must be positive")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="clebsch", description="Constrained geometric mechanics scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("config")
    sw = sub.add_parser("sweep", help="run a scenario for several dt and fit drift slopes")
    sw.add_argument("config")
    sw.add_argument("--dt", required=True, type=_parse_dts, help="comma-separated step sizes")
    chk = sub.add_parser("check", help="validate a configuration and print it normalized")
    chk.add_argument("config")
    plot = sub.add_parser("plotscript", help="write a matplotlib script for a run directory")
    plot.add_argument("run_dir")
    return parser


def _run_dir(config):
    return output_root(config) / config.output.name


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "plotscript":
        run_dir = Path(args.run_dir)
        if not (run_dir / CSV_NAME).is_file():
            return _fail(EXIT_INVALID, f"{run_dir}: no {CSV_NAME} found")
        script = run_dir / "plot_timeseries.py"
        script.write_text(PLOT_TEMPLATE.format(csv=CSV_NAME), encoding="utf-8")
        print(script)
        return EXIT_OK
    try:
        config = load_config(args.config)
    except ConfigError as err:
        return _fail(EXIT_INVALID, str(err))
    if args.command == "check":
        print(json.dumps(normalized(config), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        if args.command == "run":
            out = _run_dir(config)
            summary = simulate(config, out)
            print(f"wrote {out} ({summary['steps']} steps, {summary['wall_time_s']:.3f} s)")
        else:
            out = _run_dir(config)
            report = sweep(config, args.dt, out)
            print(
                f"wrote {out / 'sweep.json'}: constraint slope {report['constraint_slope']}, "
                f"energy slope {report['energy_slope']}"
            )
    except (NonConvergence, SingularMetric, FloatingPointError) as err:
        return _fail(EXIT_NUMERICAL, str(err))
    except (ConfigError, ConstraintViolation, HypothesisViolation, ValueError) as err:
        return _fail(EXIT_INVALID, str(err))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
