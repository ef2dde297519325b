"""
Batch front end: ``rabi-thermo <command> --config <file> [--set key=value]...``

The config is a flat ``key = value`` file; ``--set`` overrides it. Frequencies,
rates and temperatures are given in the same absolute units as ``omega0``
(default 1); CSV columns are reported in units of ``omega0``.
"""
from __future__ import annotations

import argparse
import configparser
import functools
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baths import DEFAULT_OMEGA_DEG, BathConfig, Topology
from .entangle import log_negativity, thermal_density_matrix, worker_count
from .errors import ConfigError, DegeneracyEncountered, RabiThermoError
from .lindblad import rate_matrix, transition_table
from .qrm_core import ModelParams, eigensystem
from .steady import DEFAULT_TRUNCATION_TOL, check_truncation, solve_rate_steady
from .thermo import DEFAULT_VERDICT_TOL, gibbs_populations, thermalization_report

COMMANDS = ("spectrum", "steady", "efftemp", "negativity-map", "populations")
PERTURBATION = 1e-6
FOCK_TAIL_LIMIT = 1e-10

DEFAULTS = {
    "omega0": 1.0,
    "omega_c": 1.0,
    "n_max": 60,
    "omega_deg": DEFAULT_OMEGA_DEG,
    "truncation_tol": DEFAULT_TRUNCATION_TOL,
    "verdict_tol": DEFAULT_VERDICT_TOL,
}
DEFAULT_LEVELS = {"spectrum": 8, "steady": None, "efftemp": 10, "populations": 4}
FLOAT_KEYS = {"omega0", "omega_c", "g", "beta", "T_sigma", "T_a", "T_common",
              "gamma_sigma", "gamma_a", "omega_deg", "truncation_tol", "verdict_tol"}
INT_KEYS = {"n_max", "levels"}
STR_KEYS = {"topology", "output"}
GRID_AXES = {"g", "beta", "omega_c"}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    @classmethod
    def parse(cls, name, text):
        parts = [s.strip() for s in text.split(",")]
        if len(parts) not in (3, 4):
            raise ConfigError(f"grid.{name}: expected 'min, max, points[, linear|log]'")
        try:
            start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"grid.{name}: {exc}") from None
        spacing = parts[3] if len(parts) == 4 else "linear"
        if spacing not in ("linear", "log"):
            raise ConfigError(f"grid.{name}: spacing must be linear or log")
        if points < 1:
            raise ConfigError(f"grid.{name}: need at least one point")
        if spacing == "log" and (start <= 0 or stop <= 0):
            raise ConfigError(f"grid.{name}: log spacing needs positive bounds")
        return cls(name, start, stop, points, spacing)

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)

    def __str__(self):
        return f"{fmt(self.start)}, {fmt(self.stop)}, {self.points}, {self.spacing}"


@dataclass
class RunConfig:
    command: str
    values: dict
    grid: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def output(self) -> Path:
        return Path(self.values["output"])

    def model(self, **changes) -> ModelParams:
        kw = dict(omega0=self["omega0"], omega_c=self["omega_c"],
                  g=self.get("g", 0.0), n_max=self["n_max"])
        kw.update(changes)
        try:
            return ModelParams(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def bath(self) -> BathConfig:
        try:
            topology = Topology(self["topology"].upper())
        except ValueError:
            raise ConfigError("topology must be IHB or CHB") from None
        try:
            if topology is Topology.IHB:
                return BathConfig.ihb(self["T_sigma"], self["T_a"],
                                      self["gamma_sigma"], self["gamma_a"])
            return BathConfig.chb(self["T_common"], self["gamma_sigma"], self["gamma_a"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def read_pairs(text: str, origin: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    return dict(parser["run"])


def _convert(key, raw):
    try:
        if key in FLOAT_KEYS:
            return float(raw)
        if key in INT_KEYS:
            return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return raw.strip()


REQUIRED = {
    "spectrum": ({"output"}, {"g"}),
    "steady": ({"output", "g", "topology"}, set()),
    "efftemp": ({"output", "g", "topology"}, set()),
    "negativity-map": ({"output"}, {"g"}),
    "populations": ({"output", "g"}, {"beta"}),
}
BATH_REQUIRED = {
    Topology.IHB: ("T_sigma", "T_a", "gamma_sigma", "gamma_a"),
    Topology.CHB: ("T_common", "gamma_sigma", "gamma_a"),
}


def load_config(command: str, path=None, overrides=()) -> RunConfig:
    """Resolve defaults < config file < ``key=value`` overrides and validate."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    raw = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        raw.update(read_pairs(text, str(path)))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()

    values = dict(DEFAULTS)
    if DEFAULT_LEVELS.get(command):
        values["levels"] = DEFAULT_LEVELS[command]
    grid = {}
    for key, value in raw.items():
        if key.startswith("grid."):
            name = key[5:]
            if name not in GRID_AXES:
                raise ConfigError(f"unknown grid axis {name!r}")
            grid[name] = Axis.parse(name, value)
        elif key in FLOAT_KEYS | INT_KEYS | STR_KEYS:
            values[key] = _convert(key, value)
        else:
            raise ConfigError(f"unknown key {key!r}")

    scalars, axes = REQUIRED[command]
    missing = sorted(k for k in scalars if k not in values)
    missing += sorted(f"grid.{a}" for a in axes if a not in grid)
    if missing:
        raise ConfigError(f"{command}: missing {', '.join(missing)}")
    extra = set(grid) - axes
    if command == "negativity-map":
        if len(extra) != 1 or not extra <= {"beta", "omega_c"}:
            raise ConfigError("negativity-map needs grid.g and exactly one of grid.beta, grid.omega_c")
        if "omega_c" in extra and "beta" not in values:
            raise ConfigError("negativity-map over omega_c needs a fixed beta")
    elif extra:
        raise ConfigError(f"{command}: unexpected grid axes {sorted(extra)}")
    if "topology" in values and command in ("steady", "efftemp"):
        try:
            topology = Topology(values["topology"].upper())
        except ValueError:
            raise ConfigError("topology must be IHB or CHB") from None
        values["topology"] = topology.value
        absent = [k for k in BATH_REQUIRED[topology] if k not in values]
        if absent:
            raise ConfigError(f"{command}: missing {', '.join(absent)}")
    config = RunConfig(command, values, grid)
    config.model()
    if command in ("steady", "efftemp"):
        config.bath()
    return config


def _master_equation_point(config: RunConfig):
    """Eigensystem, rate matrix and steady state, perturbing g off degeneracies."""
    params = config.model()
    flag = "ok"
    for attempt in range(2):
        eig = eigensystem(params)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegeneracyEncountered)
            table = transition_table(eig, params, config["omega_deg"])
        if not table.skipped:
            break
        flag = "degenerate"
        params = config.model(g=params.g + PERTURBATION * params.omega0)
    else:
        raise RabiThermoError(f"degenerate transitions persist at g={params.g:g}")
    steady = solve_rate_steady(rate_matrix(table, config.bath()))
    return params, eig, table, steady, flag


def _fock_tail_flag(eig, levels) -> list:
    D = eig.dim
    top = max(1, int(np.ceil(0.1 * D)))
    weight = np.sum(eig.vectors[D - top:, :levels] ** 2, axis=0)
    return ["trunc" if w > FOCK_TAIL_LIMIT else "ok" for w in weight]


def located(label, fn):
    """Wrap a per-point function so numerical failures name the grid point."""
    def wrapper(arg):
        try:
            return fn(arg)
        except RabiThermoError as exc:
            raise type(exc)(f"{label(arg)}: {exc}") from exc
    return wrapper


class Output:
    """CSV writer that flushes each row, plus the manifest record."""

    def __init__(self, config: RunConfig, header):
        self.config = config
        self.path = config.output
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.handle = open(self.path, "w", encoding="utf-8", newline="\n")
        self.handle.write(",".join(header) + "\n")
        self.flags = []
        self.extra = {}

    def row(self, *fields, flag="ok"):
        self.handle.write(",".join(fmt(f) for f in fields) + f",{flag}\n")
        self.handle.flush()
        self.flags.append(flag)

    def close(self, status="ok"):
        self.handle.close()
        write_manifest(self.config, self.flags, self.extra, status)


def write_manifest(config: RunConfig, flags, extra, status):
    lines = ["# rabi-thermo run manifest",
             f"command = {config.command}",
             f"version = {__version__}",
             f"status = {status}"]
    for key in sorted(config.values):
        lines.append(f"{key} = {fmt(config.values[key])}")
    for name in sorted(config.grid):
        lines.append(f"grid.{name} = {config.grid[name]}")
    for key in sorted(extra):
        lines.append(f"{key} = {fmt(extra[key])}")
    lines.append(f"rows = {len(flags)}")
    for flag in ("ok", "trunc", "degenerate"):
        lines.append(f"flags.{flag} = {sum(f == flag for f in flags)}")
    for i, flag in enumerate(flags):
        if flag != "ok":
            lines.append(f"flag.{i} = {flag}")
    path = config.output.with_name(config.output.name + ".manifest")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _run_spectrum(config, out):
    levels = config["levels"]
    g_values = config.grid["g"].values()
    w0 = config["omega0"]

    def point(g):
        eig = eigensystem(config.model(g=g))
        if levels > eig.dim:
            raise ConfigError("levels exceeds the basis dimension")
        return g, eig, _fock_tail_flag(eig, levels)

    with ThreadPoolExecutor(worker_count()) as pool:
        for g, eig, flags in pool.map(located(lambda g: f"g={fmt(g)}", point), g_values):
            for m in range(levels):
                out.row(g / w0, m + 1, eig.energies[m] / w0, int(eig.parities[m]), flag=flags[m])


def _run_steady(config, out):
    params, eig, table, steady, flag = _master_equation_point(config)
    check = check_truncation(steady, config["truncation_tol"])
    if flag == "ok" and not check.passed:
        flag = "trunc"
    w0 = params.omega0
    levels = config.get("levels") or eig.dim
    for m in range(min(levels, eig.dim)):
        out.row(m + 1, eig.energies[m] / w0, steady.p[m], flag=flag)
    out.extra.update({"g_used": params.g, "residual": steady.residual,
                      "tail_mass": steady.tail_mass, "truncation_passed": check.passed})


def _run_efftemp(config, out):
    params, eig, table, steady, flag = _master_equation_point(config)
    check = check_truncation(steady, config["truncation_tol"])
    if flag == "ok" and not check.passed:
        flag = "trunc"
    report = thermalization_report(steady, eig, tol=config["verdict_tol"],
                                   n_levels=config["levels"], omega_deg=config["omega_deg"])
    w0 = params.omega0
    temps = dict(report.entries)
    for m, n in report.inverted_pairs:
        temps[m, n] = (eig.energies[m] - eig.energies[n]) / np.log(steady.p[n] / steady.p[m])
    for m, n in sorted(temps):
        out.row(m + 1, n + 1, (eig.energies[m] - eig.energies[n]) / w0, temps[m, n] / w0,
                flag=flag)
    out.extra.update({
        "g_used": params.g, "residual": steady.residual, "tail_mass": steady.tail_mass,
        "truncation_passed": check.passed, "verdict": report.verdict,
        "relative_spread": report.relative_spread,
        "T_star": report.temperature / w0 if report.thermalized else "none",
        "undefined_pairs": " ".join(f"{m + 1}-{n + 1}" for m, n in report.undefined_pairs) or "none",
        "inverted_pairs": " ".join(f"{m + 1}-{n + 1}" for m, n in report.inverted_pairs) or "none",
    })


def _run_negativity(config, out):
    w0 = config["omega0"]
    g_values = config.grid["g"].values()
    axis = "beta" if "beta" in config.grid else "omega_c"
    axis_values = config.grid[axis].values()

    @functools.lru_cache(maxsize=None)
    def eig_for(omega_c, g):
        return eigensystem(config.model(omega_c=omega_c, g=g))

    def point(args):
        x, g = args
        if axis == "beta":
            beta, omega_c = x, config["omega_c"]
        else:
            beta, omega_c = config["beta"], x
        res = log_negativity(thermal_density_matrix(eig_for(omega_c, g), beta))
        return beta, omega_c, g, res

    grid = [(x, g) for x in axis_values for g in g_values]
    if axis == "beta":
        for g in g_values:  # warm the cache so workers only share finished entries
            eig_for(config["omega_c"], g)
    with ThreadPoolExecutor(worker_count()) as pool:
        label = lambda a: f"{axis}={fmt(a[0])}, g={fmt(a[1])}"
        for beta, omega_c, g, res in pool.map(located(label, point), grid):
            out.row(beta * w0, omega_c / w0, g / w0, res.N,
                    flag="ok" if res.truncation_ok else "trunc")


def _run_populations(config, out):
    w0 = config["omega0"]
    eig = eigensystem(config.model())
    levels = min(config["levels"], eig.dim)
    for beta in config.grid["beta"].values():
        gibbs = gibbs_populations(eig, beta)
        flag = "ok" if gibbs.truncation_ok else "trunc"
        for m in range(levels):
            out.row(beta * w0, m + 1, gibbs.p[m], flag=flag)


HEADERS = {
    "spectrum": ("g/omega0", "m", "energy/omega0", "parity", "flag"),
    "steady": ("m", "energy/omega0", "population", "flag"),
    "efftemp": ("m", "n", "omega_mn/omega0", "T_eff/omega0", "flag"),
    "negativity-map": ("beta*omega0", "omega_c/omega0", "g/omega0", "log_negativity", "flag"),
    "populations": ("beta*omega0", "m", "population", "flag"),
}
RUNNERS = {
    "spectrum": _run_spectrum,
    "steady": _run_steady,
    "efftemp": _run_efftemp,
    "negativity-map": _run_negativity,
    "populations": _run_populations,
}


def run(config: RunConfig, stderr=None) -> int:
    """Execute a resolved config; returns the process exit code."""
    stderr = stderr or sys.stderr
    out = Output(config, HEADERS[config.command])
    try:
        RUNNERS[config.command](config, out)
    except ConfigError as exc:
        out.handle.close()
        config.output.unlink(missing_ok=True)
        print(f"config error: {exc}", file=stderr)
        return 2
    except (RabiThermoError, np.linalg.LinAlgError) as exc:
        out.extra["failed_after_rows"] = len(out.flags)
        out.close(status="failed")
        print(f"numerical failure after row {len(out.flags)}: {type(exc).__name__}: {exc}",
              file=stderr)
        return 3
    out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabi-thermo",
        description="Thermalization and thermal entanglement of the open quantum Rabi model.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry (repeatable)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.command, args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
