"""Command-line front end: spectrum, transitivity, control, oracle.

Configuration is a flat ``key = value`` text file with typed keys; unknown
keys are a hard error.  Every run writes its fully resolved configuration and
a JSON manifest (file names, SHA-256 hashes, configuration) next to its data
files, so a run can be reproduced from its own output directory.

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 missing
prerequisite (no designated collision state).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .control_ops import operator_by_kind, project, reference_states, transitivity_scan, write_scan_csv
from .discretization import GridSpec, assemble_hamiltonian
from .errors import ConfigError, MissingTargetError, SolverError
from .model import PhysicalParams
from .propagation import ControlConfig, run_control, write_final_state_csv, write_trace_csv
from .oracles import hydrogen_oracle, rabi_oracle
from .spectrum import (
    Classification,
    classify,
    load_cached_solution,
    save_cached_solution,
    solve_spectrum,
    write_spectrum_csv,
    write_wavefunction_csv,
)

# key -> (type, default); target -1 means "designated collision state",
# K 0 means "all retained states"
CONFIG_KEYS = {
    "mu": (float, 2.7e-4),
    "Z": (float, 1.0),
    "q": (float, 1.0),
    "n": (int, 80),
    "box_length": (float, 40.0),
    "count": (int, 1200),
    "tau": (float, 0.1),
    "block": (int, 2),
    "dt": (float, 0.05),
    "n_steps": (int, 100),
    "alpha": (float, 100.0),
    "kick": (float, 0.1),
    "K": (int, 600),
    "target": (int, -1),
    "operator": (str, "magnetic"),
    "n_max": (int, 50),
    "c_rho": (float, 1.0),
    "c_R": (float, 0.0),
    "substeps": (int, 1),
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one CLI run."""

    values: dict

    @property
    def params(self) -> PhysicalParams:
        try:
            return PhysicalParams(
                mu=self.values["mu"], Z=self.values["Z"], q=self.values["q"]
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec(n=self.values["n"], box_length=self.values["box_length"])

    def control(self, target: int) -> ControlConfig:
        v = self.values
        k = v["K"] if v["K"] > 0 else None
        try:
            return ControlConfig(
                dt=v["dt"], n_steps=v["n_steps"], alpha=v["alpha"],
                target=target, K=k, operator=v["operator"], kick=v["kick"],
                substeps=v["substeps"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def parse_config_text(text: str) -> RunConfig:
    values = {key: default for key, (_, default) in CONFIG_KEYS.items()}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
        typ, _ = CONFIG_KEYS[key]
        try:
            values[key] = typ(value)
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: key {key!r} expects {typ.__name__}, got {value!r}"
            ) from exc
    cfg = RunConfig(values=values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    _ = cfg.params  # raises ConfigError on bad mu/Z/q
    spec = cfg.grid_spec
    if not 1 <= v["count"] <= spec.size:
        raise ConfigError(f"count {v['count']} outside 1..{spec.size}")
    if not 0 < v["tau"] < 1:
        raise ConfigError(f"tau must lie in (0, 1), got {v['tau']}")
    if not 1 <= v["block"] <= spec.nodes_per_axis:
        raise ConfigError(f"block {v['block']} outside 1..{spec.nodes_per_axis}")
    if v["K"] < 0 or v["K"] > v["count"]:
        raise ConfigError(f"K {v['K']} outside 0..count={v['count']}")
    if v["n_max"] < 1:
        raise ConfigError(f"n_max must be at least 1, got {v['n_max']}")
    if v["operator"] not in ("dipole", "magnetic", "diamagnetic"):
        raise ConfigError(f"unknown operator {v['operator']!r}")
    if v["c_rho"] < 0 or v["c_R"] < 0:
        raise ConfigError("c_rho and c_R must be nonnegative")
    if v["substeps"] < 1:
        raise ConfigError(f"substeps must be at least 1, got {v['substeps']}")
    if v["target"] != -1 and not 0 <= v["target"] < v["count"]:
        raise ConfigError(f"target {v['target']} outside 0..count-1")


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config_text("")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def write_effective_config(cfg: RunConfig, path: Path) -> None:
    lines = [f"{key} = {cfg.values[key]!r}" if isinstance(cfg.values[key], float)
             else f"{key} = {cfg.values[key]}"
             for key in CONFIG_KEYS]
    path.write_text("\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(
    command: str,
    cfg: RunConfig,
    out_dir: Path,
    files: list[Path],
    details: dict | None = None,
) -> Path:
    manifest = {
        "command": command,
        "box_volume": 4.0 / 3.0 * math.pi * cfg.values["box_length"] ** 3,
        "config": {k: cfg.values[k] for k in CONFIG_KEYS},
        "files": [
            {"name": f.name, "sha256": _sha256(f)} for f in sorted(files, key=lambda p: p.name)
        ],
    }
    if details:
        manifest["details"] = details
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def _obtain_solution(cfg: RunConfig, cache_dir: str | None):
    spec = cfg.grid_spec
    params = cfg.params
    count = cfg.values["count"]
    if cache_dir is not None:
        cached = load_cached_solution(cache_dir, spec, params, count)
        if cached is not None:
            return cached, True
    H = assemble_hamiltonian(spec, params)
    solution = solve_spectrum(H, count)
    if cache_dir is not None:
        save_cached_solution(cache_dir, solution, params)
    return solution, False


def _resolve_target(cfg: RunConfig, classification: Classification) -> int:
    requested = cfg.values["target"]
    if requested != -1:
        return requested
    if classification.target_index is None:
        raise MissingTargetError(
            f"no collision state designated among {len(classification.reports)} "
            f"retained states at tau={classification.tau}"
        )
    return classification.target_index


def cmd_spectrum(cfg: RunConfig, out_dir: Path, cache_dir: str | None) -> int:
    solution, from_cache = _obtain_solution(cfg, cache_dir)
    classification = classify(solution, tau=cfg.values["tau"], block=cfg.values["block"])
    files = []
    spectrum_path = out_dir / "spectrum.csv"
    write_spectrum_csv(classification, spectrum_path)
    files.append(spectrum_path)

    ground_path = out_dir / "wavefunction_state0.csv"
    write_wavefunction_csv(solution.state(0), solution.grid, ground_path)
    files.append(ground_path)
    designated = classification.target_index
    if designated is not None:
        target_path = out_dir / f"wavefunction_state{designated}.csv"
        write_wavefunction_csv(solution.state(designated), solution.grid, target_path)
        files.append(target_path)

    config_path = out_dir / "effective_config.txt"
    write_effective_config(cfg, config_path)
    files.append(config_path)
    write_manifest(
        "spectrum", cfg, out_dir, files,
        details={
            "ground_energy": float(solution.energies[0]),
            "designated_target": designated,
        },
    )
    print(
        f"spectrum: ground energy {solution.energies[0]:.17g}, "
        f"{solution.count} states{' (cache hit)' if from_cache else ''}, "
        f"first collision state "
        f"{designated if designated is not None else 'none found'}"
    )
    return 0


def cmd_transitivity(cfg: RunConfig, out_dir: Path, cache_dir: str | None) -> int:
    solution, _ = _obtain_solution(cfg, cache_dir)
    classification = classify(solution, tau=cfg.values["tau"], block=cfg.values["block"])
    target = _resolve_target(cfg, classification)
    ref1, ref2 = reference_states(classification)
    k = cfg.values["K"] if cfg.values["K"] > 0 else solution.count
    if max(target, ref1, ref2) >= k:
        raise ConfigError(
            f"scan needs K > max(target={target}, refs=({ref1}, {ref2})), got K={k}"
        )
    basis = solution.truncated(k)
    op = operator_by_kind(
        cfg.values["operator"], solution.grid, cfg.params,
        c_rho=cfg.values["c_rho"], c_R=cfg.values["c_R"],
    )
    B = project(op, basis)
    n_max = cfg.values["n_max"]
    scans = {
        "t_target": transitivity_scan(B, 0, target, n_max),
        "t_ref1": transitivity_scan(B, 0, ref1, n_max),
        "t_ref2": transitivity_scan(B, 0, ref2, n_max),
    }
    files = []
    scan_path = out_dir / f"scan_{op.kind}.csv"
    write_scan_csv(scans, scan_path)
    files.append(scan_path)
    config_path = out_dir / "effective_config.txt"
    write_effective_config(cfg, config_path)
    files.append(config_path)
    write_manifest(
        "transitivity", cfg, out_dir, files,
        details={
            "target": target,
            "ref1": ref1,
            "ref2": ref2,
            "reference_rule": "two lowest-index unflagged states above the ground state",
        },
    )
    print(
        f"transitivity[{op.kind}]: target {target} max {scans['t_target'].max():.17g}, "
        f"refs ({ref1}, {ref2}) max ({scans['t_ref1'].max():.17g}, "
        f"{scans['t_ref2'].max():.17g})"
    )
    return 0


def cmd_control(cfg: RunConfig, out_dir: Path, cache_dir: str | None) -> int:
    solution, _ = _obtain_solution(cfg, cache_dir)
    classification = classify(solution, tau=cfg.values["tau"], block=cfg.values["block"])
    target = _resolve_target(cfg, classification)
    op = operator_by_kind(
        cfg.values["operator"], solution.grid, cfg.params,
        c_rho=cfg.values["c_rho"], c_R=cfg.values["c_R"],
    )
    control_cfg = cfg.control(target)
    if control_cfg.K is not None and target >= control_cfg.K:
        raise ConfigError(f"target {target} outside truncated basis K={control_cfg.K}")
    trace = run_control(control_cfg, solution, op)
    files = []
    trace_path = out_dir / f"trace_{op.kind}.csv"
    write_trace_csv(trace, trace_path)
    files.append(trace_path)
    state_path = out_dir / f"final_state_{op.kind}.csv"
    write_final_state_csv(trace, solution.grid, state_path)
    files.append(state_path)
    config_path = out_dir / "effective_config.txt"
    write_effective_config(cfg, config_path)
    files.append(config_path)
    write_manifest(
        "control", cfg, out_dir, files,
        details={
            "target": target,
            "final_overlap": trace.final_overlap,
            "max_overlap": max(r.overlap for r in trace.records),
        },
    )
    print(f"control[{op.kind}]: target {target} final overlap {trace.final_overlap:.17g}")
    return 0


def cmd_oracle(cfg: RunConfig, out_dir: Path, cache_dir: str | None) -> int:
    failed = False
    for result in (hydrogen_oracle(), rabi_oracle()):
        status = "PASS" if result.passed else "FAIL"
        failed = failed or not result.passed
        print(
            f"oracle[{result.name}]: {status} "
            f"(max rel error {result.rel_error.max():.3e}, tol {result.tolerance:g})"
        )
    if failed:
        raise SolverError("oracle check failed")
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "transitivity": cmd_transitivity,
    "control": cmd_control,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coul3b",
        description="Three-body Coulomb spectra, collision states, and feedback control",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--cache", default=None, help="eigenbasis cache directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out_dir, args.cache)
    except (ConfigError, ValueError) as exc:
        _report_error(exc)
        return 2
    except SolverError as exc:
        _report_error(exc)
        return 3
    except MissingTargetError as exc:
        _report_error(exc)
        return 4


def _report_error(exc: Exception) -> None:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
