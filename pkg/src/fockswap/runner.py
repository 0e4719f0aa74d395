"""Declarative experiment configs, parameter sweeps and CSV output.

Configs are TOML files.  The schema is documented in ``docs/config.md``;
``validate_config`` reports every violation with the line it came from.
Each grid point gets its own seed, derived from the master seed and the
grid index, so running points in parallel never changes the results.
"""

from __future__ import annotations

import csv
import io
import itertools
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, FockSwapError
from .fitting import FitModel, FitResult, fit
from .gates import PulseEnvelope, apply, evolve_pulsed_cbs
from .hilbert import ModeLayout, make_basis_state, qubit_ground_probability
from .noise import ContrastModel, NoiseConfig
from .protocols import RECIPE_PARAMS, PrepRecipe, prepare_pair, swap_test

THREADS_ENV = "FOCKSWAP_THREADS"
KINDS = ("swap", "purity", "calibration")
SWEEP_COLUMNS = ("p_g_exact", "overlap_from_pg", "overlap_oracle", "p_g_sampled", "stderr", "shots", "seed")
CALIBRATION_COLUMNS = ("duration", "p_e_exact", "p_e_sampled", "stderr", "shots", "seed")
_TOP_KEYS = {"name", "description", "kind", "seed", "shots", "output", "metadata", "layout", "prep", "sweep",
             "noise", "contrast", "calibration"}
_CALIBRATION_KEYS = {"omega0_hz", "shape", "ramp_tau", "psi", "steps"}


@dataclass(frozen=True)
class SweepAxis:
    parameters: tuple[str, ...]
    values: tuple[float, ...]
    label: str

    @property
    def is_integer(self) -> bool:
        return all(float(v).is_integer() for v in self.values)


@dataclass(frozen=True)
class CalibrationSettings:
    omega0_hz: float = 680.0
    shape: str = "constant"
    ramp_tau: float = 0.0
    psi: float = 0.0
    steps: int = 200

    @property
    def omega0(self) -> float:
        return 2 * np.pi * self.omega0_hz


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    layout: ModeLayout
    axes: tuple[SweepAxis, ...]
    seed: int = 0
    shots: int | None = None
    recipes: dict[str, PrepRecipe] = field(default_factory=dict)
    noise: NoiseConfig | None = None
    contrast: ContrastModel | None = None
    calibration: CalibrationSettings | None = None
    output: str | None = None
    metadata: dict = field(default_factory=dict)
    source: str | None = None

    def grid(self) -> list[tuple[float, ...]]:
        return list(itertools.product(*(a.values for a in self.axes)))


@dataclass(frozen=True)
class SweepRow:
    sweep_values: tuple[float, ...]
    p_g_exact: float
    overlap_from_pg: float
    overlap_oracle: float
    p_g_sampled: float | None
    stderr: float | None
    shots: int | None
    seed: int

    def fields(self) -> tuple:
        return (*self.sweep_values, self.p_g_exact, self.overlap_from_pg, self.overlap_oracle,
                self.p_g_sampled, self.stderr, self.shots, self.seed)


@dataclass(frozen=True)
class CalibrationRow:
    duration: float
    p_e_exact: float
    p_e_sampled: float | None
    stderr: float | None
    shots: int | None
    seed: int

    def fields(self) -> tuple:
        return (self.duration, self.p_e_exact, self.p_e_sampled, self.stderr, self.shots, self.seed)


@dataclass(frozen=True)
class CalibrationResult:
    rows: list[CalibrationRow]
    fit: FitResult | None


# -- locating config lines ---------------------------------------------------------

_HEADER = re.compile(r"^\s*(\[\[?)\s*([^\]]+?)\s*\]\]?\s*(#.*)?$")
_KEY = re.compile(r"^\s*([A-Za-z0-9_.\"-]+)\s*=")


class _LineIndex:
    """Maps (table path, key) to source line numbers for error messages."""

    def __init__(self, text: str):
        self.keys: dict[tuple[str, str], int] = {}
        self.tables: dict[str, int] = {}
        counts: dict[str, int] = {}
        table = ""
        for no, line in enumerate(text.splitlines(), start=1):
            m = _HEADER.match(line)
            if m:
                table = m.group(2).replace('"', "")
                if m.group(1) == "[[":
                    counts[table] = counts.get(table, -1) + 1
                    table = f"{table}[{counts[table]}]"
                self.tables.setdefault(table, no)
                continue
            k = _KEY.match(line)
            if k:
                key = k.group(1).replace('"', "")
                # dotted keys like noise.trajectories at top level
                full = f"{table}.{key}" if table else key
                tbl, _, leaf = full.rpartition(".")
                self.keys.setdefault((tbl, leaf), no)

    def where(self, table: str, key: str | None = None) -> str:
        if key is not None and (table, key) in self.keys:
            return f"line {self.keys[(table, key)]}"
        if table in self.tables:
            return f"line {self.tables[table]}"
        return "config"


def _loads(text: str, source: str | None) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax error: {exc}"], source) from None


# -- bundled configs -----------------------------------------------------------------


def bundled_configs() -> list[str]:
    root = resources.files("fockswap") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("fockswap") / "configs" / f"{name}.toml"))


def golden_path(name: str) -> Path:
    return Path(str(resources.files("fockswap") / "configs" / "golden" / f"{name}.csv"))


def resolve_config(path_or_name: str | os.PathLike) -> Path:
    p = Path(path_or_name)
    if p.exists():
        return p
    if str(path_or_name) in bundled_configs():
        return bundled_path(str(path_or_name))
    raise ConfigError([f"no config file or bundled config named {str(path_or_name)!r}"])


# -- parsing and validation ---------------------------------------------------------------


def _axis_values(spec: dict, where: str, problems: list[str]) -> tuple[float, ...]:
    if "values" in spec:
        vals = spec["values"]
        if not isinstance(vals, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            problems.append(f"{where}: sweep values must be a list of numbers")
            return ()
        vals = [float(v) for v in vals]
    elif {"start", "stop", "num"} <= set(spec):
        num = spec["num"]
        if not isinstance(num, int) or isinstance(num, bool) or num < 1:
            problems.append(f"{where}: sweep num must be a positive integer")
            return ()
        try:
            vals = [float(v) for v in np.linspace(float(spec["start"]), float(spec["stop"]), num)]
        except (TypeError, ValueError):
            problems.append(f"{where}: sweep start/stop must be numbers")
            return ()
    else:
        problems.append(f"{where}: sweep needs either 'values' or 'start', 'stop' and 'num'")
        return ()
    if not vals:
        problems.append(f"{where}: sweep grid is empty")
    diffs = np.diff(vals)
    if len(vals) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        problems.append(f"{where}: sweep grid must be strictly monotone")
    return tuple(vals)


def _parse(raw: dict, index: _LineIndex, source: str | None) -> ExperimentConfig:
    problems: list[str] = []
    unknown = set(raw) - _TOP_KEYS
    for key in sorted(unknown):
        problems.append(f"{index.where('', key)}: unknown key {key!r}")

    kind = raw.get("kind")
    if kind not in KINDS:
        problems.append(f"{index.where('', 'kind')}: kind must be one of {KINDS}, got {kind!r}")
    name = str(raw.get("name", Path(source).stem if source else "experiment"))

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        problems.append(f"{index.where('', 'seed')}: seed must be a non-negative integer, got {seed!r}")
        seed = 0
    shots = raw.get("shots")
    if shots is not None and (not isinstance(shots, int) or isinstance(shots, bool) or shots < 1):
        problems.append(f"{index.where('', 'shots')}: shots must be a positive integer, got {shots!r}")
        shots = None

    layout = None
    default_dims = [3, 3, 1] if kind == "calibration" else [20, 20, 20]
    dims = raw.get("layout", {}).get("mode_dims", default_dims)
    try:
        layout = ModeLayout(tuple(dims))
    except (FockSwapError, TypeError, ValueError) as exc:
        problems.append(f"{index.where('layout', 'mode_dims')}: {exc}")

    recipes: dict[str, PrepRecipe] = {}
    prep = raw.get("prep", {})
    wanted = {"swap": ("B", "C"), "purity": ("state",), "calibration": ()}.get(kind, ())
    for slot in sorted(set(prep) - set(wanted)):
        problems.append(f"{index.where('prep.' + slot)}: unexpected prep table {slot!r} for kind {kind!r}")
    for slot in wanted:
        table = prep.get(slot)
        if table is None:
            problems.append(f"{index.where('prep')}: missing [prep.{slot}]")
            continue
        params = {k: v for k, v in table.items() if k != "kind"}
        try:
            recipes[slot] = PrepRecipe(table.get("kind"), params)
        except (ValueError, TypeError) as exc:
            problems.append(f"{index.where('prep.' + slot, 'kind')}: {exc}")

    calibration = None
    if kind == "calibration":
        table = raw.get("calibration", {})
        for key in sorted(set(table) - _CALIBRATION_KEYS):
            problems.append(f"{index.where('calibration', key)}: unknown calibration key {key!r}")
        try:
            calibration = CalibrationSettings(**{k: v for k, v in table.items() if k in _CALIBRATION_KEYS})
            if calibration.shape not in ("constant", "ramped") or calibration.omega0_hz <= 0 or calibration.steps < 1:
                raise ValueError("need shape 'constant' or 'ramped', omega0_hz > 0 and steps >= 1")
        except (TypeError, ValueError) as exc:
            problems.append(f"{index.where('calibration')}: {exc}")
            calibration = None

    axes = []
    sweep = raw.get("sweep")
    if not isinstance(sweep, list) or not sweep:
        problems.append(f"{index.where('sweep')}: at least one [[sweep]] axis is required")
        sweep = []
    for i, spec in enumerate(sweep):
        where = index.where(f"sweep[{i}]", "parameters")
        params = spec.get("parameters", spec.get("parameter"))
        if isinstance(params, str):
            params = [params]
        if not params or not all(isinstance(p, str) for p in params):
            problems.append(f"{where}: sweep axis {i} needs 'parameters'")
            continue
        for p in params:
            if kind == "calibration":
                if p != "duration":
                    problems.append(f"{where}: calibration sweeps only 'duration', not {p!r}")
                continue
            slot, _, pname = p.partition(".")
            if slot not in wanted:
                problems.append(f"{where}: sweep parameter {p!r} names no prep table (have {list(wanted)})")
            elif slot in recipes and pname not in RECIPE_PARAMS[recipes[slot].kind]:
                problems.append(f"{where}: sweep parameter {p!r} not in the {recipes[slot].kind} recipe "
                                f"(parameters {sorted(RECIPE_PARAMS[recipes[slot].kind])})")
        grid_key = "values" if "values" in spec else "num"
        values = _axis_values(spec, index.where(f"sweep[{i}]", grid_key), problems)
        axes.append(SweepAxis(tuple(params), values, spec.get("label", "+".join(params))))
    if kind == "calibration" and len(axes) > 1:
        problems.append(f"{index.where('sweep[1]')}: calibration takes a single duration axis")

    noise = None
    if "noise" in raw:
        t = dict(raw["noise"])
        try:
            if "dephasing_time" in t and t["dephasing_time"] in ("inf", None):
                t["dephasing_time"] = float("inf")
            noise = NoiseConfig(**t)
        except (TypeError, ValueError) as exc:
            problems.append(f"{index.where('noise')}: {exc}")
    contrast = None
    if "contrast" in raw:
        try:
            contrast = ContrastModel(**raw["contrast"])
        except (TypeError, ValueError) as exc:
            problems.append(f"{index.where('contrast')}: {exc}")

    if problems:
        raise ConfigError(problems, source)
    return ExperimentConfig(
        name=name, kind=kind, layout=layout, axes=tuple(axes), seed=seed, shots=shots, recipes=recipes,
        noise=noise, contrast=contrast, calibration=calibration, output=raw.get("output"),
        metadata=dict(raw.get("metadata", {})), source=source,
    )


def loads_config(text: str, source: str | None = None) -> ExperimentConfig:
    return _parse(_loads(text, source), _LineIndex(text), source)


def load_config(path_or_name) -> ExperimentConfig:
    path = resolve_config(path_or_name)
    return loads_config(path.read_text(), str(path))


def validate_config(path_or_name) -> list[str]:
    """Every problem in a config, without running it; empty when valid."""
    try:
        load_config(path_or_name)
    except ConfigError as exc:
        return exc.problems
    return []


# -- running ----------------------------------------------------------------------------------


def point_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=(index,)).generate_state(1, np.uint32)[0])


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def _recipes_at(config: ExperimentConfig, point: Sequence[float]) -> dict[str, PrepRecipe]:
    recipes = dict(config.recipes)
    for axis, value in zip(config.axes, point):
        for p in axis.parameters:
            slot, _, pname = p.partition(".")
            recipes[slot] = recipes[slot].with_params(**{pname: value})
    return recipes


def _run_point(config: ExperimentConfig, index: int, point: tuple[float, ...]) -> SweepRow:
    recipes = _recipes_at(config, point)
    if config.kind == "purity":
        b = c = recipes["state"]
    else:
        b, c = recipes["B"], recipes["C"]
    seed = point_seed(config.seed, index)
    try:
        state = prepare_pair(b, c, config.layout)
        res = swap_test(state, config.shots, seed, noise=config.noise, contrast=config.contrast)
    except FockSwapError as exc:
        where = ", ".join(f"{a.label}={v:g}" for a, v in zip(config.axes, point))
        raise type(exc)(f"grid point {index} ({where}): {exc}") from exc
    return SweepRow(point, res.p_g_exact, res.overlap_from_pg, res.overlap_oracle,
                    res.p_g_sampled, res.stderr, res.shots, seed)


def _map_ordered(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(*it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda it: fn(*it), items))


def run_sweep(config: ExperimentConfig, output: str | os.PathLike | None = None,
              threads: int | None = None) -> list[SweepRow]:
    if config.kind not in ("swap", "purity"):
        raise ConfigError([f"run_sweep handles swap and purity configs, not {config.kind!r}"], config.source)
    items = [(config, i, p) for i, p in enumerate(config.grid())]
    rows = _map_ordered(_run_point, items, _thread_count(threads))
    out = output if output is not None else config.output
    if out:
        write_csv(out, sweep_header(config), [r.fields() for r in rows])
    return rows


def sweep_header(config: ExperimentConfig) -> list[str]:
    return [a.label for a in config.axes] + list(SWEEP_COLUMNS)


@lru_cache(maxsize=4096)
def _calibration_pe(omega0: float, t: float, shape: str, ramp_tau: float, psi: float, steps: int,
                    layout: ModeLayout) -> float:
    start = make_basis_state(layout, "g", 1, 1, 0)
    dims = (layout.factor_dim("A"), layout.factor_dim("B"))
    env = PulseEnvelope(omega0, ramp_tau if shape == "ramped" else 0.0, t, shape)
    gate = evolve_pulsed_cbs(env, psi, ("A", "B"), dims, steps=steps)
    return min(max(1.0 - qubit_ground_probability(apply(gate, start)), 0.0), 1.0)


def calibration_rows(omega0: float, durations: Sequence[float], shots: int | None = None, seed: int = 0, *,
                     shape: str = "constant", ramp_tau: float = 0.0, psi: float = 0.0, steps: int = 200,
                     layout: ModeLayout = ModeLayout((3, 3, 1)), threads: int | None = None) -> list[CalibrationRow]:
    """P_e after a controlled A-B splitter of each duration, from |g>|1>_A|1>_B."""

    def one(i, t):
        p_e = _calibration_pe(float(omega0), float(t), shape, float(ramp_tau), float(psi), int(steps), layout)
        s = point_seed(seed, i)
        if shots is None:
            return CalibrationRow(float(t), p_e, None, None, None, s)
        p_hat = np.random.default_rng(s).binomial(shots, p_e) / shots
        return CalibrationRow(float(t), p_e, float(p_hat), float(np.sqrt(p_hat * (1 - p_hat) / shots)), shots, s)

    return _map_ordered(one, list(enumerate(durations)), _thread_count(threads))


def run_calibration(omega0: float, durations: Sequence[float], shots: int | None = 500, seed: int = 0, *,
                    shape: str = "constant", ramp_tau: float = 0.0, psi: float = 0.0, steps: int = 200,
                    output: str | os.PathLike | None = None, threads: int | None = None) -> CalibrationResult:
    """Simulate the coupling-strength calibration and fit P0 sin^2(T omega0)."""
    rows = calibration_rows(omega0, durations, shots, seed, shape=shape, ramp_tau=ramp_tau, psi=psi,
                            steps=steps, threads=threads)
    if output:
        write_csv(output, list(CALIBRATION_COLUMNS), [r.fields() for r in rows])
    ys = [r.p_e_sampled if r.p_e_sampled is not None else r.p_e_exact for r in rows]
    result = fit(FitModel("sine-squared"), [r.duration for r in rows], ys)
    return CalibrationResult(rows, result)


def run_config(config: ExperimentConfig, output=None, threads: int | None = None):
    if config.kind == "calibration":
        cal = config.calibration
        return run_calibration(cal.omega0, config.axes[0].values, config.shots, config.seed, shape=cal.shape,
                               ramp_tau=cal.ramp_tau, psi=cal.psi, steps=cal.steps,
                               output=output if output is not None else config.output, threads=threads)
    return run_sweep(config, output, threads)


# -- CSV -------------------------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def format_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    Path(path).write_text(format_csv(header, rows), newline="")


def read_csv(path) -> tuple[list[str], list[list[float | int | None]]]:
    """Parse a CSV written by ``write_csv``; empty cells become None, shots/seed ints."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for rec in reader:
            row = []
            for name, cell in zip(header, rec):
                if cell == "":
                    row.append(None)
                elif name in ("shots", "seed"):
                    row.append(int(cell))
                else:
                    row.append(float(cell))
            rows.append(row)
    return header, rows
