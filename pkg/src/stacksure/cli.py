"""Command-line entry points.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import sys

import click

from ._version import __version__
from .config import load_config
from .core import RngStream
from .dataio import save_csv
from .errors import ConfigError, DataFormatError
from .runner import emit_report, run_experiment
from .synth import generate_params, sample_dataset

EXIT_CONFIG = 1
EXIT_IO = 2


@click.group()
def main():
    """Stacked-ensemble experiments with five AUC estimators."""


def _load(config_path, seed, workers, out):
    overrides = {}
    if seed is not None:
        overrides["master_seed"] = seed
    if workers is not None:
        overrides["worker_count"] = workers
    if out is not None:
        overrides["output_dir"] = out
    return load_config(config_path, overrides=overrides)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Config file.")
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--workers", type=int, default=None, help="Override the worker count.")
@click.option("--out", type=click.Path(), default=None, help="Override the output directory.")
@click.option(
    "--unstratified",
    is_flag=True,
    help="Plain random fold splits instead of class-stratified ones.",
)
def run(config_path, seed, workers, out, unstratified):
    """Run the configured experiment and write the report files."""
    try:
        cfg = _load(config_path, seed, workers, out)
        if unstratified:
            import dataclasses

            cfg = dataclasses.replace(
                cfg, protocol=dataclasses.replace(cfg.protocol, stratified=False)
            )
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)
    try:
        bundle = run_experiment(cfg)
        written = emit_report(bundle, cfg.output_dir)
    except DataFormatError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)
    n_undef = bundle.run_metadata["n_undefined"]
    click.echo(
        f"{len(bundle.records)} records ({n_undef} undefined) in "
        f"{bundle.run_metadata['total_wall_time_ms']} ms"
    )
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Config file.")
@click.option("--out", required=True, type=click.Path(), help="Destination CSV file.")
@click.option("--seed", type=int, default=None, help="Override the master seed.")
def gen(config_path, out, seed):
    """Export one synthetic dataset drawn from the configured generator."""
    try:
        cfg = _load(config_path, seed, None, None)
        if cfg.mode != "synthetic":
            raise ConfigError("gen requires mode = synthetic")
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)
    try:
        root = RngStream(cfg.master_seed)
        seed_stream = RngStream(cfg.generator.seed) if cfg.generator.seed is not None else root
        params = generate_params(cfg.generator, seed_stream.child("params"))
        dataset = sample_dataset(params, cfg.n_obs, root.child("data", 0))
        save_csv(dataset, out)
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {out} ({dataset.n} rows, {dataset.p} features)")


@main.command()
def version():
    """Print the package version."""
    click.echo(__version__)


if __name__ == "__main__":
    main()
