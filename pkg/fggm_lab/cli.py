"""Command-line interface for training, attacking and evaluating schedulers."""

import argparse
import logging
import sys
from typing import List, Optional

from shared.config_loader import load_lab_config
from shared.settings import get_settings
from . import workflows


COMMANDS = ("train", "attack", "eval", "sweep", "compare")
SEED_REQUIRED = ("eval", "sweep", "compare")


def _add_common(parser: argparse.ArgumentParser, seed_required: bool) -> None:
    parser.add_argument("--config", help="Flat YAML config file (default: built-in defaults)")
    parser.add_argument("--seed", type=int, required=seed_required, help="Master seed")
    parser.add_argument("--output-dir", help="Output directory (overrides FGGM_LAB_OUTPUT_DIR and config)")
    parser.add_argument("--log-level", help="Logging level (default: FGGM_LAB_LOG_LEVEL or INFO)")
    parser.add_argument("--checkpoint", dest="checkpoint_path", help="Checkpoint file")


def _add_attack_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", dest="attack_scheme", choices=["none", "fggm", "spgd", "noise"])
    parser.add_argument("--delta-adv", type=float)
    parser.add_argument("--delta-vic", type=float)
    parser.add_argument("--num-adversaries", type=int)
    parser.add_argument("--restarts", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--attack-result", dest="attack_result_path", help="attack.json to reuse")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fggm-lab",
        description="fggm-lab - DRL user scheduling under falsified-CSI attacks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  fggm-lab train --config config/lab_l8.yaml --seed 0
  fggm-lab attack --config config/lab_l8.yaml --checkpoint outputs/checkpoint.fggm --scheme fggm
  fggm-lab eval --config config/lab_l8.yaml --seed 3 --scheme fggm --attack-result outputs/attack.json
  fggm-lab sweep --config config/sweep_delta.yaml --seed 0
  fggm-lab compare --config config/lab_l8.yaml --seed 0
        """
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    train_parser = subparsers.add_parser("train", help="Train the SAC scheduler")
    _add_common(train_parser, seed_required=False)
    train_parser.add_argument("--total-steps", type=int, help="Environment steps")

    attack_parser = subparsers.add_parser("attack", help="Compute adversarial observations")
    _add_common(attack_parser, seed_required=False)
    _add_attack_flags(attack_parser)

    eval_parser = subparsers.add_parser("eval", help="Run one experiment")
    _add_common(eval_parser, seed_required=True)
    _add_attack_flags(eval_parser)
    eval_parser.add_argument(
        "--policy", choices=["random", "opt_pf", "opt_mr", "opt_pf_ug", "sac"]
    )

    sweep_parser = subparsers.add_parser("sweep", help="Delta grid or adversary-count sweep")
    _add_common(sweep_parser, seed_required=True)
    _add_attack_flags(sweep_parser)
    sweep_parser.add_argument("--axis", dest="sweep_axis", choices=["delta_grid", "num_adversaries"])
    sweep_parser.add_argument("--workers", type=int)

    compare_parser = subparsers.add_parser("compare", help="All schedulers and attack schemes")
    _add_common(compare_parser, seed_required=True)
    _add_attack_flags(compare_parser)

    parser.add_argument("--version", action="version", version="fggm-lab 0.1.0")
    return parser


OVERRIDE_KEYS = (
    "seed",
    "checkpoint_path",
    "attack_scheme",
    "delta_adv",
    "delta_vic",
    "num_adversaries",
    "restarts",
    "iterations",
    "samples",
    "attack_result_path",
    "policy",
    "sweep_axis",
    "workers",
    "total_steps",
)


def run(args: argparse.Namespace) -> None:
    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    overrides = {k: getattr(args, k, None) for k in OVERRIDE_KEYS}
    unset = ["adversaries"] if overrides.get("num_adversaries") is not None else []
    lab = load_lab_config(args.config).with_overrides(unset=unset, **overrides)
    output_dir = workflows.resolve_output_dir(args.output_dir, settings.output_dir, lab.experiment.output_dir)

    if args.command == "train":
        paths = workflows.train_scheduler(lab, output_dir)
        print(f"✅ Trained scheduler: {paths['checkpoint']}")
        print(f"   Training curve: {paths['training_curve']}")
    elif args.command == "attack":
        result = workflows.attack_checkpoint(lab, output_dir)
        print(f"✅ {result.scheme} attack on users {list(result.adversaries)}")
        print(f"   Objective: {result.best_objective:.6f} (restart {result.best_restart})")
        print(f"   Written: {output_dir / workflows.ATTACK_NAME}")
    elif args.command == "eval":
        paths = workflows.evaluate(lab, output_dir)
        print(f"✅ Evaluation written to {paths['summary'].parent}")
    elif args.command == "sweep":
        paths = workflows.run_sweep(lab, output_dir)
        print(f"✅ Sweep written to {paths['summary']}")
    elif args.command == "compare":
        paths = workflows.run_compare(lab, output_dir)
        print(f"✅ Comparison written to {paths['summary']}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    try:
        run(args)
    except Exception as e:
        print(f"\n❌ Error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
