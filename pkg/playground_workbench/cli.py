"""
Playground Workbench command line

    playground-workbench make-data --trajectories 5000 --seed 1 --out data/
    playground-workbench pretrain-or --out runs/or
    playground-workbench train-reward --variant ma --data data/ --seed 1 --out runs/ma
    playground-workbench train-agent --config desk.yaml --out runs/agent
    playground-workbench evaluate --agent runs/agent/agent.npz --suite vary-n --out runs/eval
    playground-workbench report --out runs/eval

Exit codes: 0 success, 1 workbench failure, 2 usage error, 3 integrity failure.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click

from . import __version__
from .core.config import CHOICES, RunConfig, default_data_root
from .core.errors import WorkbenchError
from .core.logging_config import setup_logging
from .workbench import Workbench

logger = logging.getLogger(__name__)

# flag name -> configuration key
_RUN_OPTIONS = {
    "seed": "seed", "out": "out", "data": "data", "variant": "variant", "n_objects": "n_objects",
    "trajectories": "trajectories", "epochs": "epochs", "episodes": "episodes",
    "goal_set": "goal_set", "precision": "precision", "log_level": "log_level",
    "suite": "suite", "agent": "agent_checkpoint", "reward": "reward_checkpoint",
    "or_checkpoint": "or_checkpoint",
}


def run_options(command: Callable) -> Callable:
    """Flags shared by every command."""
    options = [
        click.option("--seed", type=int, help="Master seed; every random stream derives from it."),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="Flat YAML/JSON settings file."),
        click.option("--out", type=click.Path(file_okay=False),
                     help="Output directory (default: $PLAYGROUND_DATA_DIR or ./data)."),
        click.option("--data", type=click.Path(file_okay=False), help="Dataset directory (default: --out)."),
        click.option("--variant", type=click.Choice(CHOICES["variant"], case_sensitive=False)),
        click.option("--n-objects", type=int, help="Objects per scene."),
        click.option("--trajectories", type=int, help="Scripted trajectories to collect."),
        click.option("--epochs", type=int, help="Reward training epochs."),
        click.option("--episodes", type=int, help="Joint training episodes."),
        click.option("--goal-set", type=click.Choice(CHOICES["goal_set"])),
        click.option("--precision", type=click.Choice(CHOICES["precision"])),
        click.option("--log-level", type=click.Choice(CHOICES["log_level"], case_sensitive=False)),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _workbench(config_path: Optional[str], flags: Dict[str, Any]) -> Workbench:
    overrides = {_RUN_OPTIONS[name]: value for name, value in flags.items()
                 if name in _RUN_OPTIONS and value is not None}
    if isinstance(overrides.get("log_level"), str):
        overrides["log_level"] = overrides["log_level"].upper()
    config = RunConfig.from_file(config_path, overrides)
    out = Path(config["out"] or default_data_root())
    setup_logging(str(out / "logs"), config["log_level"])
    return Workbench(config)


@click.group()
@click.version_option(__version__, prog_name="playground-workbench")
def cli() -> None:
    """Language-conditioned reward learning and goal-conditioned agents in the Playground."""


@cli.command("make-data")
@run_options
@click.option("--full-scale", is_flag=True, help="Collect 50000 trajectories.")
def make_data(config_path, full_scale, **flags) -> None:
    """Collect and persist scripted trajectories."""
    result = _workbench(config_path, flags).run_make_data(full_scale=full_scale)
    click.echo(f"Dataset: {result['train']} train / {result['test']} test trajectories")


@cli.command("pretrain-or")
@run_options
def pretrain_or(config_path, **flags) -> None:
    """Pretrain the OR network."""
    result = _workbench(config_path, flags).run_pretrain_or()
    click.echo(f"OR network: {result['checkpoint']}")


@cli.command("train-reward")
@run_options
@click.option("--or-checkpoint", type=click.Path(exists=True, dir_okay=False))
def train_reward(config_path, **flags) -> None:
    """Supervised reward training on a scripted dataset."""
    result = _workbench(config_path, flags).run_train_reward()
    click.echo(f"Reward model: {result['checkpoint']}")


@cli.command("train-agent")
@run_options
@click.option("--reward", type=click.Path(exists=True, dir_okay=False),
              help="Start from a trained reward checkpoint.")
@click.option("--or-checkpoint", type=click.Path(exists=True, dir_okay=False))
def train_agent(config_path, **flags) -> None:
    """Joint agent and reward training from social-partner feedback."""
    result = _workbench(config_path, flags).run_train_agent()
    click.echo(f"Agent: {result['checkpoint']}")


@cli.command("evaluate")
@run_options
@click.option("--suite", type=click.Choice(CHOICES["suite"]))
@click.option("--agent", type=click.Path(exists=True, dir_okay=False), help="Agent checkpoint.")
@click.option("--reward", type=click.Path(exists=True, dir_okay=False), help="Reward checkpoint.")
def evaluate(config_path, **flags) -> None:
    """Offline evaluation suites."""
    result = _workbench(config_path, flags).run_evaluate()
    click.echo(f"Records: {result['records']}")


@cli.command("report")
@run_options
def report(config_path, **flags) -> None:
    """Render the records of a run directory."""
    result = _workbench(config_path, flags).run_report()
    click.echo(f"Workbook: {result['workbook']}")


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code."""
    try:
        cli.main(args=argv, prog_name="playground-workbench", standalone_mode=False)
        return 0
    except click.UsageError as e:
        e.show()
        return 2
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return 1
    except click.exceptions.Exit as e:
        return e.exit_code
    except WorkbenchError as e:
        logger.error(f"{type(e).__name__}: {e}")
        click.echo(f"Error: {e}", err=True)
        return e.exit_code
    except KeyboardInterrupt:
        click.echo("Interrupted by user.", err=True)
        return 1
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        click.echo(f"Error: {e}", err=True)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
