"""Command line entry points for the sidecar service."""

from __future__ import annotations

import sys

import click


@click.group()
def cli() -> None:
    """Reference generation and NLI services."""


@cli.command()
@click.option("--checkpoint", required=True, help="Generation model checkpoint directory.")
@click.option("--nli-model", default=None, help="Local NLI checkpoint; heuristic fallback if omitted.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--max-new-tokens-cap", default=128, show_default=True, type=int)
def serve(checkpoint: str, nli_model: str | None, host: str, port: int,
          max_new_tokens_cap: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .app import ServiceConfig, create_app

    config = ServiceConfig(
        generation_checkpoint=checkpoint,
        nli_model=nli_model,
        host=host,
        port=port,
        max_new_tokens_cap=max_new_tokens_cap,
    )
    uvicorn.run(create_app(config), host=config.host, port=config.port)


@cli.command("finetune-toy")
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Mixed-style corpus JSONL with source/target rows.")
@click.option("--steps", default=400, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, help="Checkpoint output directory.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--learning-rate", default=3e-4, show_default=True, type=float)
def finetune_toy_cmd(corpus: str, steps: int, out_dir: str, seed: int,
                     learning_rate: float) -> None:
    """Train the toy seq2seq on a corpus and save a servable checkpoint."""
    from .generation import finetune_toy

    model = finetune_toy(corpus, steps=steps, out_dir=out_dir, seed=seed,
                         learning_rate=learning_rate)
    click.echo(f"saved checkpoint {model.identifier!r} to {out_dir}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 1
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
