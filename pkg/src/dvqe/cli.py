"""Batch entry point.

``dvqe solve`` computes an eigenstate ladder for one Hamiltonian file;
``dvqe sweep`` runs a warm-started scan over a set of them.  Both read a JSON
run config and write JSON + CSV reports into the output directory.

Exit codes: 0 all levels converged, 1 config or input errors, 2 partial
convergence / failed sweep points.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ansatz import DepthSchedule, h2_depth_schedule, lih_depth_schedule
from .driver import (
    AnsatzSettings,
    GammaSettings,
    OptimizerSettings,
    RunSettings,
    Schedule,
    ShotSchedule,
    SweepPlan,
    WarmStartSettings,
    load_hamiltonian,
    solve_ladder,
    sweep,
)
from .mitigation import ReadoutNoise
from .pauli import PauliParseError

__all__ = ["main", "cmd_solve", "cmd_sweep", "ConfigError", "load_config", "load_plan"]

CONFIG_SCHEMA = 1

DEPTH_PRESETS = {
    "h2": h2_depth_schedule,
    "lih": lih_depth_schedule,
}


class ConfigError(ValueError):
    """Bad run config or sweep plan; message names the offending field."""


def _require(doc: dict, field: str, kind, where: str):
    value = doc.get(field)
    if value is None or not isinstance(value, kind):
        raise ConfigError(f"{where}: field {field!r} must be {kind.__name__}")
    return value


def _int_keys(doc: dict, where: str) -> dict[int, int]:
    try:
        return {int(k): int(v) for k, v in doc.items()}
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: keys and values must be integers") from None


def _parse_ansatz(doc: dict | None) -> AnsatzSettings | None:
    if doc is None:
        return None
    preset = doc.get("preset")
    if preset is not None:
        if preset not in DEPTH_PRESETS:
            raise ConfigError(f"ansatz.preset: unknown preset {preset!r}")
        depth = DEPTH_PRESETS[preset]()
    else:
        depth = DepthSchedule(
            _int_keys(_require(doc, "generator_layers", dict, "ansatz"), "ansatz.generator_layers"),
            _int_keys(_require(doc, "discriminator_layers", dict, "ansatz"), "ansatz.discriminator_layers"),
        )
    axes = tuple(doc.get("axes", "YX"))
    try:
        return AnsatzSettings(axes=axes, depth=depth)
    except ValueError as exc:
        raise ConfigError(f"ansatz: {exc}") from None


def _parse_noise(doc: dict | None, qubit_count: int) -> ReadoutNoise | None:
    if doc is None:
        return None
    if "p" in doc:
        return ReadoutNoise.uniform(qubit_count, float(doc["p"]), doc.get("p10"))
    try:
        return ReadoutNoise(tuple(doc["p01"]), tuple(doc["p10"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"noise: {exc}") from None


def load_config(path: str | Path, qubit_count: int) -> tuple[RunSettings, int, str | None]:
    """Parse a run config; returns (settings, seed, out_dir)."""
    where = str(path)
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: config must be a JSON object")
    if doc.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"{where}: field 'schema' must be {CONFIG_SCHEMA}")

    mode = doc.get("mode", "exact")
    noise = _parse_noise(doc.get("noise"), qubit_count + 1)
    try:
        schedule = Schedule(**doc.get("schedule", {}))
        shot_schedule = ShotSchedule(
            **{
                k: tuple(v) if isinstance(v, list) else v
                for k, v in doc.get("shot_schedule", {}).items()
            }
        )
        optimizer = OptimizerSettings(**doc.get("optimizer", {}))
        gamma = GammaSettings(**doc.get("gamma", {}))
        warm = WarmStartSettings(**doc.get("warm_start", {}))
        settings = RunSettings(
            mode=mode,
            ansatz=_parse_ansatz(doc.get("ansatz")),
            optimizer=optimizer,
            schedule=schedule,
            shot_schedule=shot_schedule,
            noise=noise,
            mitigation=bool(doc.get("mitigation", False)),
            calibration_shots=int(doc.get("calibration_shots", 8192)),
            gamma=gamma,
            warm_start=warm,
        )
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return settings, int(doc.get("seed", 0)), doc.get("out_dir")


def load_plan(path: str | Path) -> SweepPlan:
    where = str(path)
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: line {exc.lineno}: {exc.msg}") from None
    distances = _require(doc, "distances", list, where)
    files = _require(doc, "hamiltonians", dict, where)
    base = Path(path).parent
    try:
        plan = SweepPlan(
            bond_distances=tuple(float(d) for d in distances),
            anchor_distance=float(_require(doc, "anchor", (int, float), where)),
            hamiltonian_files={float(k): str(base / v) for k, v in files.items()},
            levels=int(_require(doc, "levels", int, where)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return plan


def _apply_overrides(settings: RunSettings, seed: int, out_dir, args) -> tuple[RunSettings, int, Path]:
    if args.mode is not None:
        settings = RunSettings(
            mode=args.mode,
            ansatz=settings.ansatz,
            optimizer=settings.optimizer,
            schedule=settings.schedule,
            shot_schedule=settings.shot_schedule,
            noise=settings.noise,
            mitigation=settings.mitigation and args.mode == "sampled",
            calibration_shots=settings.calibration_shots,
            gamma=settings.gamma,
            warm_start=settings.warm_start,
        )
    if args.seed is not None:
        seed = args.seed
    out = Path(args.out_dir) if args.out_dir is not None else Path(out_dir or ".")
    return settings, seed, out


def cmd_solve(args) -> int:
    try:
        h = load_hamiltonian(args.hamiltonian)
    except OSError as exc:
        print(f"error: {args.hamiltonian}: {exc}", file=sys.stderr)
        return 1
    except PauliParseError as exc:
        print(f"error: {args.hamiltonian}: {exc}", file=sys.stderr)
        return 1
    try:
        settings, seed, out_dir = load_config(args.config, h.qubit_count)
        settings, seed, out = _apply_overrides(settings, seed, out_dir, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    result = solve_ladder(h, settings, args.levels, seed)
    result.write(out)
    for row in result.level_rows():
        status = "ok" if row["converged"] else "NOT CONVERGED"
        oracle = f"  oracle {row['oracle']:+.6f}" if row["oracle"] is not None else ""
        print(f"level {row['level']}: energy {row['energy']:+.6f}{oracle}  [{status}]")
    print(f"reports written to {out}/ladder.json and {out}/ladder.csv")
    return 0 if result.all_converged else 2


def cmd_sweep(args) -> int:
    try:
        plan = load_plan(args.plan)
        probe = load_hamiltonian(plan.hamiltonian_files[plan.anchor_distance])
        settings, seed, out_dir = load_config(args.config, probe.qubit_count)
        settings, seed, out = _apply_overrides(settings, seed, out_dir, args)
    except (ConfigError, OSError, PauliParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report = sweep(plan, settings, seed)
    report.write(out)
    for point in report.points:
        if point.failed:
            print(f"distance {point.distance:g}: FAILED ({point.error})")
        else:
            energies = ", ".join(f"{e:+.6f}" for e in point.result.energies())
            tag = " (retried)" if point.retried else ""
            print(f"distance {point.distance:g}: {energies}{tag}")
    print(f"reports written to {out}/sweep.csv and {out}/errors_by_level.csv")
    return 2 if report.any_failed or not all(p.converged for p in report.points) else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dvqe",
        description="Ground and excited states of Pauli-sum Hamiltonians "
        "via the discriminative VQE.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one Hamiltonian file")
    solve.add_argument("--config", required=True, help="run config JSON")
    solve.add_argument("--hamiltonian", required=True, help="Pauli-sum text file")
    solve.add_argument("--levels", type=int, required=True, help="number of eigenstates")
    solve.set_defaults(func=cmd_solve)

    swp = sub.add_parser("sweep", help="run a bond-distance sweep plan")
    swp.add_argument("--config", required=True, help="run config JSON")
    swp.add_argument("--plan", required=True, help="sweep plan JSON")
    swp.set_defaults(func=cmd_sweep)

    for p in (solve, swp):
        p.add_argument("--seed", type=int, default=None, help="override the root seed")
        p.add_argument("--out-dir", default=None, help="report output directory")
        p.add_argument("--mode", choices=("exact", "sampled"), default=None)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
