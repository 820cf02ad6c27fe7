"""Command-line client: batch runs, paired comparisons, the API server, and
checkpoint replay.

`run` and `compare` call the same simulation engine the service exposes, so
a scenario executed through N API step calls and one CLI run produce the
same report. Exit code is nonzero on any error; with --strict it is also
nonzero when a guardrail rolled the scenario back.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .domain import parse_json, to_json
from .errors import FadeError
from .harness import (
    RunReport,
    compare_runs,
    list_presets,
    load_preset,
    run_scenario,
)
from .world import WorldConfig


def _load_world(config_path: str | None, seed: int | None) -> WorldConfig:
    if config_path is None:
        world = WorldConfig()
    else:
        path = Path(config_path)
        if not path.exists():
            raise FadeError(f"config file not found: {config_path}")
        world = WorldConfig.from_dict(parse_json(path.read_text(), str(path)))
    if seed is not None:
        world = world.with_seed(seed)
    return world


def _write_report(report: RunReport, out_dir: Path, stem: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.csv").write_text(report.csv_text())
    (out_dir / f"{stem}.summary.json").write_text(report.summary_json())
    (out_dir / f"{stem}.report.json").write_text(to_json(report.to_dict()))


@click.group()
def main() -> None:
    """Feature-fading rollout simulator and control-plane service."""


@main.command()
@click.option("--config", "config_path", default=None, help="World config JSON path.")
@click.option("--scenario", required=True, help="Preset name or scenario JSON path.")
@click.option("--seed", type=int, default=None, help="Override the world seed.")
@click.option("--out-dir", default="out", show_default=True)
@click.option("--strict", is_flag=True, help="Exit nonzero on guardrail rollback.")
def run(config_path, scenario, seed, out_dir, strict) -> None:
    """Run one scenario and write CSV, summary, and report checkpoint."""
    try:
        world = _load_world(config_path, seed)
        scenario_cfg = load_preset(scenario, world)
        report = run_scenario(world, scenario_cfg)
    except FadeError as exc:
        click.echo(f"error[{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    _write_report(report, Path(out_dir), scenario_cfg.name)
    s = report.summary
    click.echo(f"scenario {scenario_cfg.name}: {len(report.series)} days simulated")
    if s.peak_daily_delta_ne is not None:
        click.echo(
            f"  baseline NE {s.baseline_ne:.4f}  peak daily dNE "
            f"{s.peak_daily_delta_ne:.4f}  cumulative dNE {s.cumulative_delta_ne:.4f}"
        )
    if report.aborted:
        click.echo("  aborted by guardrail rollback")
        if strict:
            sys.exit(2)


@main.command()
@click.argument("scenario_a")
@click.argument("scenario_b")
@click.option("--config", "config_path", default=None, help="World config JSON path.")
@click.option("--seed", type=int, default=None, help="Base world seed.")
@click.option("--seeds", "n_seeds", type=int, default=1, show_default=True,
              help="Number of paired seeds (seed, seed+1, ...).")
@click.option("--out-dir", default="out", show_default=True)
@click.option("--strict", is_flag=True, help="Exit nonzero on guardrail rollback.")
def compare(scenario_a, scenario_b, config_path, seed, n_seeds, out_dir, strict) -> None:
    """Run two scenarios on paired seeds and emit a phase-wise comparison.

    SCENARIO_B is the reference (normalized to 100%)."""
    try:
        base_world = _load_world(config_path, seed)
        comparisons = []
        aborted = False
        for i in range(n_seeds):
            world = base_world.with_seed(base_world.seed + i)
            rep_a = run_scenario(world, load_preset(scenario_a, world))
            rep_b = run_scenario(world, load_preset(scenario_b, world))
            aborted = aborted or rep_a.aborted or rep_b.aborted
            comparisons.append((world.seed, compare_runs(rep_a, rep_b)))
    except FadeError as exc:
        click.echo(f"error[{exc.code}]: {exc.message}", err=True)
        sys.exit(1)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "a": scenario_a,
        "b": scenario_b,
        "seeds": [s for s, _ in comparisons],
        "comparisons": [c.to_dict() for _, c in comparisons],
    }
    (out / f"compare_{scenario_a}_vs_{scenario_b}.json").write_text(to_json(payload))

    # aggregate phase table over seeds
    bands: dict[str, list[float]] = {}
    for _, c in comparisons:
        for row in c.phase_table:
            bands.setdefault(row.label, []).append(row.delta)
    click.echo(f"{scenario_a} vs {scenario_b} ({n_seeds} paired seed(s))")
    click.echo("band      mean excess-NE deficit (a - b)")
    for label, deltas in bands.items():
        click.echo(f"{label:>8}  {sum(deltas) / len(deltas):+.4f}")
    peaks = [c.peak_ratio_pct for _, c in comparisons if c.peak_ratio_pct is not None]
    cums = [
        c.cumulative_ratio_pct
        for _, c in comparisons
        if c.cumulative_ratio_pct is not None
    ]
    if peaks:
        click.echo(f"peak daily dNE: a is {sum(peaks) / len(peaks):.1f}% of b")
    if cums:
        click.echo(f"cumulative dNE: a is {sum(cums) / len(cums):.1f}% of b")
    if aborted and strict:
        sys.exit(2)


@main.command()
@click.option("--config", "config_path", default=None, help="World config JSON path.")
@click.option("--scenario", default=None, help="Preset whose rollouts start created.")
@click.option("--seed", type=int, default=None)
@click.option("--bind", default="127.0.0.1:8321", show_default=True)
def serve(config_path, scenario, seed, bind) -> None:
    """Start the /v1 HTTP API (the operator console's backend)."""
    import uvicorn

    from .service import create_app

    try:
        world = _load_world(config_path, seed)
        scenario_cfg = load_preset(scenario, world) if scenario else None
        app = create_app(world, scenario_cfg)
    except FadeError as exc:
        click.echo(f"error[{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8321))


@main.command()
@click.option("--checkpoint", required=True, help="A *.report.json file from `run`.")
@click.option("--out-dir", default="out", show_default=True)
def replay(checkpoint, out_dir) -> None:
    """Re-emit CSV and summary from a saved report checkpoint."""
    path = Path(checkpoint)
    if not path.exists():
        click.echo(f"error[config-parse]: checkpoint not found: {checkpoint}", err=True)
        sys.exit(1)
    try:
        report = RunReport.from_dict(parse_json(path.read_text(), str(path)))
    except (FadeError, KeyError) as exc:
        click.echo(f"error[config-parse]: bad checkpoint: {exc}", err=True)
        sys.exit(1)
    if report.recomputed_summary() != report.summary:
        click.echo("error[config-parse]: checkpoint summary is not consistent "
                   "with its series", err=True)
        sys.exit(1)
    stem = Path(checkpoint).name.removesuffix(".report.json")
    _write_report(report, Path(out_dir), stem)
    click.echo(f"replayed {stem}: {len(report.series)} days")


@main.command(name="presets")
def presets_cmd() -> None:
    """List shipped scenario presets."""
    for name in list_presets():
        click.echo(name)


if __name__ == "__main__":
    main()
