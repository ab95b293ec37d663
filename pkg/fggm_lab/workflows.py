"""
Subcommand workflows behind the CLI.

Each function takes a validated ``LabConfig`` and an output directory,
writes its artefacts and returns what it produced.
"""

from typing import Dict, Optional
from pathlib import Path
import logging

import numpy as np

from agents import Checkpoint, train
from attack import AttackResult, noise_attack, run_attack
from channel import generate_csi_trace, load_trace
from evaluation import (
    ExperimentReporter,
    build_threat,
    compare,
    load_checkpoint,
    run_experiment,
    sweep,
    write_csv,
)
from experiments import TrainingTracker
from mdp.env import EnvState, reset
from shared.config_loader import LabConfig


logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.fggm"
ATTACK_NAME = "attack.json"


def episode_factory(lab: LabConfig):
    """Fresh environment per training episode on its own seeded trace."""
    experiment, sac = lab.experiment, lab.sac
    env_config = experiment.env_config()
    shared_trace = None
    if experiment.trace_path:
        shared_trace = load_trace(Path(experiment.trace_path), experiment.tx_power, experiment.noise_variance)

    def make(episode: int) -> EnvState:
        if shared_trace is not None:
            start = (episode * sac.episode_length) % max(len(shared_trace) - sac.episode_length, 1)
            return reset(env_config, shared_trace[start:start + sac.episode_length + 1])
        seq = np.random.SeedSequence([sac.seed, episode])
        seed = int(seq.generate_state(1, dtype=np.uint64)[0])
        trace = generate_csi_trace(experiment.channel_config(seed), sac.episode_length + 1)
        return reset(env_config, trace)

    return make


def train_scheduler(lab: LabConfig, output_dir: Path) -> Dict[str, Path]:
    tracker = TrainingTracker(run_name=lab.experiment.name, mlflow_tracking=lab.experiment.track_mlflow)
    with tracker.run(seed=lab.sac.seed, total_steps=lab.sac.total_steps):
        checkpoint = train(episode_factory(lab), lab.sac, lab.experiment.env_config(), tracker=tracker)
    return {
        "checkpoint": checkpoint.save(Path(output_dir) / CHECKPOINT_NAME),
        "training_curve": tracker.write_csv(Path(output_dir) / "training_curve.csv"),
    }


def attack_checkpoint(lab: LabConfig, output_dir: Path) -> AttackResult:
    """Compute o_adv once for the configured scheme and write ``attack.json``."""
    experiment = lab.experiment
    if experiment.attack_scheme == "none":
        raise ValueError("attack needs attack_scheme (or --scheme) set to fggm, spgd or noise")
    checkpoint: Checkpoint = load_checkpoint(experiment)
    threat = build_threat(experiment, checkpoint)
    if experiment.attack_scheme == "noise":
        result = AttackResult(
            scheme="noise",
            adversaries=threat.adversaries,
            o_adv=noise_attack(threat, experiment.seed),
            best_objective=float("nan"),
            best_restart=0,
            metadata={"per_slot": True, "delta_adv": threat.delta_adv, "seed": experiment.seed},
        )
    else:
        result = run_attack(checkpoint, threat, experiment.attack_config())
    result.save_json(Path(output_dir) / ATTACK_NAME)
    return result


def evaluate(lab: LabConfig, output_dir: Path) -> Dict[str, Path]:
    report = run_experiment(lab.experiment)
    return ExperimentReporter(Path(output_dir)).write(report)


def run_sweep(lab: LabConfig, output_dir: Path) -> Dict[str, Path]:
    result = sweep(lab.experiment)
    return {
        "summary": write_csv(result.rows, Path(output_dir) / "summary.csv"),
        "cells": write_csv(result.cells, Path(output_dir) / "cells.csv"),
    }


def run_compare(lab: LabConfig, output_dir: Path) -> Dict[str, Path]:
    rows = compare(lab.experiment)
    return {"summary": write_csv(rows, Path(output_dir) / "summary.csv")}


def resolve_output_dir(flag: Optional[str], env_value: Optional[str], config_value: str) -> Path:
    """--output-dir beats FGGM_LAB_OUTPUT_DIR beats the config file."""
    return Path(flag or env_value or config_value)
