"""Config files, checkpoints and the CSV / JSON writers.

Config files are INI style with the sections ``[problem]``, ``[initial]``
and ``[solver]`` (required) plus optional ``[classify]``, ``[output]`` and
``[run]``. Unknown sections or keys are errors.

Checkpoints are text: a version line, the config hash, then one JSON
document in which every float is written with ``float.hex`` so that the
round trip is bit exact.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .classify import ClassifyConfig
from .grid import NormalizedState, nodes
from .model import PROFILE_FAMILIES, ProblemSpec, validate_spec
from .solver import DIAG_COLUMNS, SAMPLE_COLUMNS, Progress, RunRecord, StepControl

CHECKPOINT_MAGIC = "STEFANDUO-CHECKPOINT"
CHECKPOINT_VERSION = 1
FORMATS = ("csv", "json")
REQUIRED_SECTIONS = ("problem", "initial", "solver")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


class CheckpointError(ValueError):
    """Unreadable, corrupted or mismatched checkpoint."""


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "stefanduo_out"
    formats: tuple = FORMATS
    cadence: int = 1          # write every cadence-th sample
    figures: bool = True
    checkpoint_every: int = 0  # steps; 0 disables


@dataclass(frozen=True)
class RunConfig:
    spec: ProblemSpec
    family: str
    A: float
    ctrl: StepControl
    classify: ClassifyConfig = ClassifyConfig()
    output: OutputConfig = OutputConfig()
    seed: int = 0
    jobs: int = 1

    def echo(self) -> dict:
        """Resolved configuration as plain JSON data."""
        return _clean({
            "problem": asdict(self.spec),
            "initial": {"family": self.family, "A": self.A},
            "solver": asdict(self.ctrl),
            "classify": asdict(self.classify),
            "output": asdict(self.output),
            "run": {"seed": self.seed, "jobs": self.jobs},
        })

    def hash(self) -> str:
        """SHA-256 of the settings that determine the trajectory."""
        echo = self.echo()
        core = {k: echo[k] for k in ("problem", "initial", "solver")}
        # stopping controls do not change the trajectory, so a halted run
        # may be resumed with a longer horizon or step budget
        for key in ("horizon", "max_steps"):
            core["solver"].pop(key)
        text = json.dumps(core, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _as_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_floats(text: str) -> tuple:
    text = text.strip()
    return tuple(float(x) for x in text.split(",") if x.strip()) if text else ()


def _as_formats(text: str) -> tuple:
    out = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [x for x in out if x not in FORMATS]
    if bad:
        raise ValueError(f"unknown format(s) {bad}; expected {FORMATS}")
    return out


def _converters(cls, special: dict) -> dict:
    out = {}
    for f in fields(cls):
        if f.name in special:
            out[f.name] = special[f.name]
        elif f.type in ("int", int):
            out[f.name] = int
        elif f.type in ("bool", bool):
            out[f.name] = _as_bool
        elif f.type in ("str", str):
            out[f.name] = str
        else:
            out[f.name] = float
    return out


SCHEMA = {
    "problem": _converters(ProblemSpec, {"s0_rule": str}),
    "initial": {"family": str, "A": float},
    "solver": _converters(StepControl, {"snapshot_times": _as_floats}),
    "classify": _converters(ClassifyConfig, {}),
    "output": _converters(OutputConfig, {"formats": _as_formats}),
    "run": {"seed": int, "jobs": int},
}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive (N vs n)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        conv = SCHEMA[section]
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in conv:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            try:
                values[section][key] = conv[key](raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: bad value for {section}.{key}: {exc}") from None
    missing = [s for s in REQUIRED_SECTIONS if s not in values]
    if missing:
        raise ConfigError(f"{source}: missing section(s) " + ", ".join(f"[{s}]" for s in missing))
    return build_config(values, source)


def build_config(values: dict, source: str = "<config>") -> RunConfig:
    try:
        spec = ProblemSpec(**values.get("problem", {}))
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    problems = validate_spec(spec)
    if problems:
        raise ConfigError(f"{source}: invalid problem: " + "; ".join(problems))
    initial = values.get("initial", {})
    family = initial.get("family", "cosine")
    if family not in PROFILE_FAMILIES:
        raise ConfigError(f"{source}: unknown profile family {family!r}")
    if "A" not in initial:
        raise ConfigError(f"{source}: [initial] needs A")
    A = initial["A"]
    if A < 0:
        raise ConfigError(f"{source}: amplitude A must be >= 0")
    try:
        ctrl = StepControl(**values.get("solver", {}))
        out = OutputConfig(**values.get("output", {}))
        cls = ClassifyConfig(**values.get("classify", {}))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if out.cadence < 1:
        raise ConfigError(f"{source}: output.cadence >= 1 required")
    if out.checkpoint_every < 0:
        raise ConfigError(f"{source}: output.checkpoint_every >= 0 required")
    run = values.get("run", {})
    jobs = run.get("jobs", 1)
    if jobs < 1:
        raise ConfigError(f"{source}: run.jobs >= 1 required")
    return RunConfig(spec, family, A, ctrl, cls, out, run.get("seed", 0), jobs)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def with_overrides(cfg: RunConfig, n: Optional[int] = None, horizon: Optional[float] = None,
                   A: Optional[float] = None, jobs: Optional[int] = None) -> RunConfig:
    changes = {}
    if n is not None:
        changes["n"] = n
    if horizon is not None:
        changes["horizon"] = horizon
    try:
        ctrl = replace(cfg.ctrl, **changes) if changes else cfg.ctrl
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = replace(cfg, ctrl=ctrl)
    if A is not None:
        out = replace(out, A=float(A))
    if jobs is not None:
        out = replace(out, jobs=jobs)
    return out


# ------------------------------------------------------------ JSON helpers

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj, path) -> None:
    text = json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_record_csv(record: RunRecord, path, cadence: int = 1) -> None:
    rows = record.samples if cadence == 1 else record.subsample(cadence).samples
    write_csv(path, SAMPLE_COLUMNS, rows)


def write_diagnostics_csv(record: RunRecord, path, cadence: int = 1) -> None:
    rows = record.diagnostics if cadence == 1 else record.subsample(cadence).diagnostics
    write_csv(path, DIAG_COLUMNS, rows)


def write_snapshots_csv(record: RunRecord, path) -> None:
    rows = []
    for st in record.snapshots:
        for s, w, z in zip(nodes(st.n), st.w, st.z):
            rows.append((st.t, s, w, z))
    write_csv(path, ("t", "s", "w", "z"), rows)


def read_record_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SAMPLE_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        return [tuple(float(x) for x in row) for row in reader]


# ------------------------------------------------------------ checkpoints

def _hex(x) -> str:
    return float(x).hex()


def _unhex(s) -> float:
    return float.fromhex(s)


def _state_json(st: NormalizedState) -> dict:
    return {"t": _hex(st.t), "h": _hex(st.h), "g": _hex(st.g),
            "w": [_hex(v) for v in st.w], "z": [_hex(v) for v in st.z]}


def _state_from(d: dict) -> NormalizedState:
    return NormalizedState(_unhex(d["t"]), _unhex(d["h"]), _unhex(d["g"]),
                           np.array([_unhex(v) for v in d["w"]]),
                           np.array([_unhex(v) for v in d["z"]]))


def checkpoint_write(progress: Progress, path, config_hash: str) -> None:
    """Write a checkpoint atomically (temporary file, then rename)."""
    body = {
        "state": _state_json(progress.state),
        "step": progress.step,
        "cap": _hex(progress.cap),
        "samples": [[_hex(v) for v in row] for row in progress.samples],
        "diagnostics": [[_hex(v) for v in row] for row in progress.diagnostics],
        "snapshots": [_state_json(s) for s in progress.snapshots],
    }
    text = (f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n"
            f"config-sha256 {config_hash}\n"
            + json.dumps(body, sort_keys=True, separators=(",", ":")) + "\n")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def checkpoint_read(path, config_hash: Optional[str] = None) -> Progress:
    """Read a checkpoint; with ``config_hash`` the stored hash must match."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc.strerror}") from None
    lines = text.split("\n", 2)
    if len(lines) < 3:
        raise CheckpointError("truncated checkpoint")
    head = lines[0].split(" ")
    if len(head) != 2 or head[0] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad header)")
    if head[1] != str(CHECKPOINT_VERSION):
        raise CheckpointError(f"unsupported checkpoint version {head[1]!r}")
    tag, _, stored = lines[1].partition(" ")
    if tag != "config-sha256" or len(stored) != 64:
        raise CheckpointError("bad config hash line")
    if config_hash is not None and stored != config_hash:
        raise CheckpointError("checkpoint was written for a different configuration")
    try:
        body = json.loads(lines[2])
        state = _state_from(body["state"])
        samples = [tuple(_unhex(v) for v in row) for row in body["samples"]]
        diags = [tuple(_unhex(v) for v in row) for row in body["diagnostics"]]
        snaps = [_state_from(s) for s in body["snapshots"]]
        step = int(body["step"])
        cap = _unhex(body["cap"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"corrupted checkpoint body: {exc}") from None
    return Progress(state, step, samples, diags, snaps, cap)


def checkpoint_hash(path) -> str:
    """Config hash stored in a checkpoint header."""
    with open(path) as fh:
        fh.readline()
        tag, _, stored = fh.readline().strip().partition(" ")
    if tag != "config-sha256":
        raise CheckpointError("bad config hash line")
    return stored


def output_dir(cli_value: Optional[str], cfg: Optional[RunConfig]) -> Path:
    """--out, then $STEFANDUO_OUT, then the config's output.directory."""
    if cli_value:
        return Path(cli_value)
    env = os.environ.get("STEFANDUO_OUT")
    if env:
        return Path(env)
    return Path(cfg.output.directory if cfg is not None else OutputConfig.directory)


def load_schema(name: str) -> dict:
    """Published JSON schema for a report (meta, sweep, bisect, lifespan, barriers)."""
    from importlib.resources import files
    return json.loads(files("stefanduo").joinpath("schemas", f"{name}.schema.json").read_text())
