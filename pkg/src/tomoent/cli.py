"""Command-line runner: ``tomoent {model-run,circuit-run,indicators,qasm}``.

Experiments are described by a flat YAML file (see ``CONFIG_SCHEMA``); flags
override individual keys. Exit codes: 0 success, 1 I/O failure, 2 invalid
configuration or input, 3 numerical invariant violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np
import yaml

from . import io
from .circuit import RECIPES, emit_qasm, emit_suite, exact_tomogram, parse_qasm, run_tomography, tomogram_from_counts
from .circuit.qasm import QasmError
from .hilbert import evolve_many, partial_trace
from .indicators import (
    joint_tomogram_setting_values,
    pair_indicators,
    spin_setting_values,
    xi_tei_prime,
)
from .models import InitialStateSpec, djc_model, dtc_model
from .tomography import JointFieldTomogram, QuadratureGrid, SpinTomogram, joint_optical_tomogram, spin_tomogram
from .validation import InvariantViolation

MODES = ("model_djc", "model_dtc", "circuit", "indicators_from_file")
CSV_HEADER = "gt,xi_tei_field,xi_tei_prime_field,xi_qmi_field,xi_tei_atom,xi_tei_prime_atom,xi_qmi_atom"
DEFAULT_INITIAL = {"model_djc": "psi0", "model_dtc": "psi0_psi0"}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "mode": {"enum": list(MODES)},
        "initial_state": {"type": ["string", "null"]},
        "delta": {"type": "number"},
        "frame": {"enum": ["interaction", "lab"]},
        "n_max": {"type": ["integer", "null"], "minimum": 1},
        "t_start": {"type": "number"},
        "t_step": {"type": "number", "exclusiveMinimum": 0},
        "n_steps": {"type": "integer", "minimum": 1},
        "x_max": {"type": "number", "exclusiveMinimum": 0},
        "n_points": {"type": "integer", "minimum": 64},
        "theta_count": {"type": "integer", "minimum": 1},
        "shots": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "repeats": {"type": "integer", "minimum": 1},
        "circuit": {"enum": sorted(RECIPES)},
        "theta": {"type": "number", "minimum": 0, "maximum": math.pi},
        "files": {"type": "array", "items": {"type": "string"}},
        "blocks": {
            "type": ["array", "null"],
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            "minItems": 2,
            "maxItems": 2,
        },
        "out": {"type": "string"},
        "tomogram_steps": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "emit_qasm": {"type": "boolean"},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """One experiment. Times are in units of ``pi / g``."""

    mode: str = "model_djc"
    initial_state: str | None = None
    delta: float = 0.0
    frame: str = "interaction"
    n_max: int | None = None
    t_start: float = 0.0
    t_step: float = 0.02
    n_steps: int = 300
    x_max: float = 8.0
    n_points: int = 321
    theta_count: int = 16
    shots: int = 8192
    seed: int = 0
    repeats: int = 1
    circuit: str = "bell"
    theta: float = math.pi
    files: list[str] = field(default_factory=list)
    blocks: list[list[str]] | None = None
    out: str = "out"
    tomogram_steps: list[int] = field(default_factory=list)
    emit_qasm: bool = False

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(doc, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = ".".join(str(p) for p in exc.absolute_path) or "config"
            raise ConfigError(f"{where}: {exc.message}") from None
        cfg = cls(**doc)
        cfg.check()
        return cfg

    def check(self) -> None:
        if self.mode in DEFAULT_INITIAL:
            if self.initial_state is None:
                self.initial_state = DEFAULT_INITIAL[self.mode]
            try:
                spec = InitialStateSpec.parse(self.initial_state)
            except ValueError as exc:
                raise ConfigError(f"initial_state: {exc}") from None
            want = 1 if self.mode == "model_djc" else 2
            if len(spec.atom_blocks) != want:
                raise ConfigError(f"initial_state: {self.mode} needs {want} atomic block(s), got {self.initial_state!r}")
        if self.mode == "indicators_from_file":
            if not self.files:
                raise ConfigError("files: indicators_from_file needs at least one file")
            missing = [f for f in self.files if not Path(f).is_file()]
            if missing:
                raise ConfigError(f"files: not found: {', '.join(missing)}")
        if any(k >= self.n_steps for k in self.tomogram_steps):
            raise ConfigError(f"tomogram_steps: indices must be below n_steps={self.n_steps}")

    def grid(self) -> QuadratureGrid:
        return QuadratureGrid.uniform(self.x_max, self.n_points, self.theta_count)

    def times(self) -> np.ndarray:
        return (self.t_start + self.t_step * np.arange(self.n_steps)) * np.pi


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    doc = {}
    if path is not None:
        try:
            doc = yaml.safe_load(Path(path).read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a mapping of keys to values")
    doc.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_dict(doc)


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        raise InvariantViolation(f"refusing to serialize non-finite value {x}")
    return format(x, ".17g")


def _model_for(cfg: ExperimentConfig):
    kwargs = {"delta": cfg.delta, "initial": cfg.initial_state, "frame": cfg.frame}
    if cfg.n_max is not None:
        kwargs["n_max"] = cfg.n_max
    return djc_model(**kwargs) if cfg.mode == "model_djc" else dtc_model(**kwargs)


def timeseries_name(cfg: ExperimentConfig) -> str:
    return f"{cfg.mode.removeprefix('model_')}_{cfg.initial_state}_delta{cfg.delta:g}.csv"


def run_model_experiment(cfg: ExperimentConfig) -> Path:
    """Write the indicator time series (and any requested tomogram dumps); return the CSV path."""
    if cfg.mode not in DEFAULT_INITIAL:
        raise ConfigError(f"mode: model-run needs model_djc or model_dtc, got {cfg.mode!r}")
    model = _model_for(cfg)
    grid = cfg.grid()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    field_part, atom_part = model.partitions["field"], model.partitions["atom"]
    dumps = set(cfg.tomogram_steps)
    lines = [CSV_HEADER]
    times = cfg.times()
    for k, (t, state) in enumerate(zip(times, evolve_many(model.hamiltonian, model.psi0, times))):
        row = (model.params.g * t,) + pair_indicators(state, field_part, grid) + pair_indicators(state, atom_part, grid)
        lines.append(",".join(_fmt(float(v)) for v in row))
        if k in dumps:
            stem = out / f"tomogram_step{k:04d}"
            io.write_tomogram(joint_optical_tomogram(partial_trace(state, field_part[0] + field_part[1]), grid),
                              f"{stem}_field.json")
            io.write_tomogram(spin_tomogram(partial_trace(state, atom_part[0] + atom_part[1])), f"{stem}_atom.json")
    path = out / timeseries_name(cfg)
    path.write_text("\n".join(lines) + "\n")
    return path


def _summary_stats(runs: list[dict]) -> tuple[dict, dict]:
    mean, std = {}, {}
    for key in ("xi_tei", "xi_tei_prime"):
        v = np.array([r[key] for r in runs])
        mean[key] = float(v.mean())
        std[key] = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return mean, std


def _spin_result(tomo: SpinTomogram, blocks, sources: list[str]) -> dict:
    values = spin_setting_values(tomo, *blocks) if blocks else spin_setting_values(tomo)
    mis = [v.mi for v in values]
    k = tomo.n_qubits
    used = [list(b) for b in blocks] if blocks else [list(tomo.labels[: k // 2]), list(tomo.labels[k // 2:])]
    return {
        "sources": sources,
        "blocks": used,
        "xi_tei": float(np.mean(mis)),
        "xi_tei_prime": xi_tei_prime(mis),
        "settings": [{"setting": list(v.setting), "mi": v.mi} for v in values],
    }


def run_circuit_experiment(cfg: ExperimentConfig) -> Path:
    """Sample every measurement setting for each seed; write counts files and a summary."""
    recipe = RECIPES[cfg.circuit]
    prep = recipe.build(cfg.theta) if recipe.parametrized else recipe.build()
    labels = recipe.labels()
    blocks = (recipe.labels(recipe.blocks[0]), recipe.labels(recipe.blocks[1]))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.emit_qasm:
        qdir = out / "qasm"
        qdir.mkdir(exist_ok=True)
        for name, text in emit_suite(prep, recipe.qubits).items():
            (qdir / name).write_text(text)
    runs = []
    if cfg.shots == 0:
        tomo = exact_tomogram(prep, recipe.qubits, labels)
        io.write_tomogram(tomo, out / "tomogram_exact.json")
        res = _spin_result(tomo, blocks, ["tomogram_exact.json"])
        runs.append({"seed": None, "xi_tei": res["xi_tei"], "xi_tei_prime": res["xi_tei_prime"]})
    else:
        for i in range(cfg.repeats):
            seed = cfg.seed + i
            tables = run_tomography(prep, recipe.qubits, cfg.shots, seed)
            sdir = out / f"seed_{seed}"
            sdir.mkdir(exist_ok=True)
            for t in tables:
                io.write_counts(t, sdir / f"counts_{''.join(t.setting)}.json", seed=seed)
            res = _spin_result(tomogram_from_counts(tables, labels), blocks, [])
            runs.append({"seed": seed, "xi_tei": res["xi_tei"], "xi_tei_prime": res["xi_tei_prime"]})
    mean, std = _summary_stats(runs)
    path = out / "summary.json"
    io.write_summary(
        {"source": cfg.circuit, "blocks": [list(b) for b in blocks], "shots": cfg.shots,
         "runs": runs, "mean": mean, "std": std},
        path,
    )
    return path


def compute_indicators(files: Sequence[str | Path], blocks=None) -> list[dict]:
    """Indicators from tomogram files, or from one set of counts files forming a full tomography."""
    blocks = tuple(tuple(b) for b in blocks) if blocks else None
    formats = [io.document_format(f) for f in files]
    if all(fmt == io.COUNTS_FORMAT for fmt in formats):
        tables = [io.read_counts(f) for f in files]
        try:
            tomo = tomogram_from_counts(tables)
        except ValueError as exc:
            raise io.FormatError(f"inconsistent counts files: {exc}") from None
        return [_spin_result(tomo, blocks, [str(f) for f in files])]
    results = []
    for f, fmt in zip(files, formats):
        if fmt != io.TOMOGRAM_FORMAT:
            raise io.FormatError(f"{f}: cannot mix counts files with {fmt!r} documents")
        tomo = io.read_tomogram(f)
        if isinstance(tomo, SpinTomogram):
            results.append(_spin_result(tomo, blocks, [str(f)]))
        elif isinstance(tomo, JointFieldTomogram):
            values = joint_tomogram_setting_values(tomo)
            mis = [v.mi for v in values]
            results.append({
                "sources": [str(f)],
                "blocks": [[tomo.labels[0]], [tomo.labels[1]]],
                "xi_tei": float(np.mean(mis)),
                "xi_tei_prime": xi_tei_prime(mis),
                "settings": [{"setting": list(v.setting), "mi": v.mi} for v in values],
            })
        else:
            raise io.FormatError(f"{f}: a single-mode optical tomogram has no bipartition")
    return results


def _blocks_arg(a: str | None, b: str | None):
    if (a is None) != (b is None):
        raise ConfigError("--block-a and --block-b must be given together")
    return None if a is None else [a.split(","), b.split(",")]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML experiment file")
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--out", help="output directory (or file for 'indicators')")
    p.add_argument("--delta", type=float, help="detuning omega - omega0 in units of g")
    p.add_argument("--initial", dest="initial_state", help="psi0, phi0, psi0_phi0, ...")
    p.add_argument("--steps", dest="n_steps", type=int)
    p.add_argument("--step-size", dest="t_step", type=float, help="time step in units of pi/g")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tomoent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model-run", help="indicator time series of the double JC or TC model")
    _add_common(p)
    p.add_argument("--model", choices=("djc", "dtc"))

    p = sub.add_parser("circuit-run", help="sampled spin tomography of a preparation circuit")
    _add_common(p)
    p.add_argument("--circuit", choices=sorted(RECIPES))
    p.add_argument("--repeats", type=int, help="number of executions, seeds seed..seed+repeats-1")
    p.add_argument("--theta", type=float, help="exchange angle of the djc_equiv circuit")
    p.add_argument("--emit-qasm", action="store_const", const=True, default=None)

    p = sub.add_parser("indicators", help="indicators from tomogram or counts files")
    _add_common(p)
    p.add_argument("files", nargs="*", type=str)
    p.add_argument("--block-a", help="comma-separated labels of the first block")
    p.add_argument("--block-b", help="comma-separated labels of the second block")

    p = sub.add_parser("qasm", help="parse, validate or emit OpenQASM 2.0")
    qsub = p.add_subparsers(dest="action", required=True)
    q = qsub.add_parser("parse", help="print the gate list of a QASM file as JSON")
    q.add_argument("file", type=Path)
    q = qsub.add_parser("validate", help="check QASM files")
    q.add_argument("files", nargs="+", type=Path)
    q = qsub.add_parser("emit", help="print a preparation circuit, or write its measurement suite")
    q.add_argument("circuit", choices=sorted(RECIPES))
    q.add_argument("--theta", type=float, default=math.pi)
    q.add_argument("--suite", type=Path, help="directory for one file per measurement setting")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = {f.name for f in fields(ExperimentConfig)}
    return {k: v for k, v in vars(args).items() if k in keys and k != "files"}


def _qasm(args: argparse.Namespace) -> int:
    if args.action == "parse":
        c = parse_qasm(args.file.read_text())
        gates = [{"kind": g.kind.value, "targets": list(g.targets), "params": list(g.params),
                  **({"clbit": g.clbit} if g.clbit is not None else {})} for g in c.gates]
        print(json.dumps({"num_qubits": c.num_qubits, "num_clbits": c.num_clbits, "gates": gates}, indent=1))
    elif args.action == "validate":
        for f in args.files:
            c = parse_qasm(f.read_text())
            print(f"{f}: ok ({c.num_qubits} qubits, {len(c.gates)} operations)")
    else:
        recipe = RECIPES[args.circuit]
        prep = recipe.build(args.theta) if recipe.parametrized else recipe.build()
        if args.suite is None:
            sys.stdout.write(emit_qasm(prep))
        else:
            args.suite.mkdir(parents=True, exist_ok=True)
            for name, text in emit_suite(prep, recipe.qubits).items():
                (args.suite / name).write_text(text)
    return 0


def _run(args: argparse.Namespace) -> int:
    if args.command == "qasm":
        return _qasm(args)
    overrides = _overrides(args)
    if args.command == "model-run":
        if args.model:
            overrides["mode"] = f"model_{args.model}"
        print(run_model_experiment(load_config(args.config, overrides)))
    elif args.command == "circuit-run":
        cfg = load_config(args.config, {**overrides, "mode": "circuit"})
        print(run_circuit_experiment(cfg))
    else:
        files = args.files or None
        cfg = load_config(args.config, {**overrides, "mode": "indicators_from_file", "files": files,
                                        "blocks": _blocks_arg(args.block_a, args.block_b)})
        text = io.write_indicators(compute_indicators(cfg.files, cfg.blocks),
                                   args.out if args.out else None)
        if not args.out:
            sys.stdout.write(text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except InvariantViolation as exc:
        print(f"error: numerical invariant violated: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, io.FormatError, QasmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def config_template() -> str:
    """Default configuration as YAML."""
    return yaml.safe_dump(asdict(ExperimentConfig()), sort_keys=False)


if __name__ == "__main__":
    sys.exit(main())
