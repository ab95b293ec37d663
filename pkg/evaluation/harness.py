"""
Evaluation Harness

Runs one configuration slot by slot: the channel advances, adversaries
report falsified CSI, the scheduler acts on the reported observation and
rates are delivered according to the true channel.

Every random stream is derived from ``config.seed``; identical configs give
identical reports.
"""

from typing import List, Optional, Sequence
from pathlib import Path
import logging

import numpy as np

from agents.checkpoint import Checkpoint
from attack import AttackResult, ThreatModel, noise_attack, run_attack, threat_from_checkpoint
from channel import ChannelState, generate_csi_trace, load_trace
from mdp.actions import decode_action
from mdp.env import observe, reset, step
from mdp.observation import csi_from_blocks
from schedulers import SchedulerConfigError, SlotContext, create_scheduler
from shared.schemas.experiment import ExperimentConfig
from .metrics import ExperimentReport, MetricsReport, jfi


logger = logging.getLogger(__name__)


class ExperimentConfigError(ValueError):
    """Configuration, checkpoint and attack inputs do not fit together."""
    pass


def _seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def load_checkpoint(config: ExperimentConfig, checkpoint: Optional[Checkpoint] = None) -> Optional[Checkpoint]:
    """The checkpoint a run needs (SAC policy or any attack), validated against the config."""
    needs = config.policy == "sac" or config.attack_scheme != "none"
    if checkpoint is None and needs:
        if not config.checkpoint_path:
            raise ExperimentConfigError(
                f"policy={config.policy!r} with attack_scheme={config.attack_scheme!r} needs checkpoint_path"
            )
        path = Path(config.checkpoint_path)
        if not path.exists():
            raise ExperimentConfigError(f"Checkpoint not found: {path}")
        checkpoint = Checkpoint.load(path)
    if checkpoint is not None:
        env = checkpoint.env_config
        want = (config.num_users, config.num_antennas, config.max_selected)
        have = (env.num_users, env.num_antennas, env.max_selected)
        if needs and want != have:
            raise ExperimentConfigError(
                f"Checkpoint trained for (L, M, N) = {have}, config asks for {want}"
            )
    return checkpoint


def build_threat(config: ExperimentConfig, checkpoint: Checkpoint) -> ThreatModel:
    return threat_from_checkpoint(
        checkpoint,
        adversaries=config.adversary_users,
        delta_adv=config.delta_adv,
        delta_vic=config.delta_vic,
        falsify_rate_dims=config.falsify_rate_dims,
    )


def resolve_attack(
    config: ExperimentConfig,
    checkpoint: Optional[Checkpoint],
    attack_result: Optional[AttackResult] = None,
) -> Optional[AttackResult]:
    """Precomputed o_adv for fggm/spgd: given, loaded from file, or computed now."""
    if config.attack_scheme not in ("fggm", "spgd"):
        return None
    if attack_result is None and config.attack_result_path:
        path = Path(config.attack_result_path)
        if not path.exists():
            raise ExperimentConfigError(f"Attack result not found: {path}")
        attack_result = AttackResult.load_json(path)
    if attack_result is None:
        attack_result = run_attack(checkpoint, build_threat(config, checkpoint), config.attack_config())
    if attack_result.scheme != config.attack_scheme:
        raise ExperimentConfigError(
            f"Attack result is for {attack_result.scheme!r}, config runs {config.attack_scheme!r}"
        )
    if tuple(attack_result.adversaries) != config.adversary_users:
        raise ExperimentConfigError(
            f"Attack result adversaries {tuple(attack_result.adversaries)} "
            f"differ from configured {config.adversary_users}"
        )
    return attack_result


def reported_csi(true_csi: np.ndarray, adversaries: Sequence[int], blocks: Optional[np.ndarray]) -> np.ndarray:
    """True CSI with the adversaries' columns replaced by their falsified report."""
    if blocks is None or not adversaries:
        return true_csi
    csi = true_csi.copy()
    csi[:, list(adversaries)] = csi_from_blocks(blocks, true_csi.shape[0])
    return csi


def _trace(config: ExperimentConfig, seed: int) -> List[ChannelState]:
    if config.trace_path:
        trace = load_trace(Path(config.trace_path), config.tx_power, config.noise_variance)
        if len(trace) < config.num_slots:
            raise ExperimentConfigError(
                f"Trace {config.trace_path} holds {len(trace)} slots, run needs {config.num_slots}"
            )
        return trace[:config.num_slots]
    return generate_csi_trace(config.channel_config(seed), config.num_slots)


def run_replica(
    config: ExperimentConfig,
    replica: int,
    seq: np.random.SeedSequence,
    checkpoint: Optional[Checkpoint],
    attack_result: Optional[AttackResult],
    threat: Optional[ThreatModel],
) -> MetricsReport:
    trace_seq, policy_seq, noise_seq = seq.spawn(3)
    env = reset(config.env_config(), _trace(config, _seed_int(trace_seq)))
    scheduler = create_scheduler(
        config.policy,
        num_users=config.num_users,
        max_selected=config.max_selected,
        tx_power=config.tx_power,
        noise_variance=config.noise_variance,
        checkpoint=checkpoint,
        seed=_seed_int(policy_seq),
    )
    adversaries = config.adversary_users if config.attack_scheme != "none" else ()
    fixed_blocks = attack_result.o_adv if attack_result is not None else None
    noise_base = _seed_int(noise_seq)

    selected: List[tuple] = []
    rates = np.zeros((config.num_slots, config.num_users))
    pf = np.zeros(config.num_slots)
    slot_jfi = np.zeros(config.num_slots)
    for t in range(config.num_slots):
        true_csi = env.channel.true_csi
        if config.attack_scheme == "noise":
            blocks = noise_attack(threat, (noise_base + t) % 2**63)
        else:
            blocks = fixed_blocks
        reported = reported_csi(true_csi, adversaries, blocks)
        obs = observe(env, reported)
        context = SlotContext(slot=t, reported_csi=reported, average_rates=env.average_rates, observation=obs)
        action = scheduler.select(context)
        env, reward, slot_rates = step(env, action, reported)
        selected.append(decode_action(action, config.num_users, config.max_selected))
        rates[t] = slot_rates
        pf[t] = reward
        slot_jfi[t] = jfi(env.average_rates)

    return MetricsReport(
        victims=config.victim_users,
        selected=selected,
        rates=rates,
        pf_scores=pf,
        slot_jfi=slot_jfi,
        final_average_rates=env.average_rates.copy(),
        replica=replica,
    )


def run_experiment(
    config: ExperimentConfig,
    *,
    checkpoint: Optional[Checkpoint] = None,
    attack_result: Optional[AttackResult] = None,
) -> ExperimentReport:
    """Run ``num_resource_blocks`` independent replicas of one configuration."""
    checkpoint = load_checkpoint(config, checkpoint)
    try:
        if config.policy in ("opt_pf", "opt_mr", "opt_pf_ug", "random"):
            create_scheduler(
                config.policy,
                num_users=config.num_users,
                max_selected=config.max_selected,
                tx_power=config.tx_power,
                noise_variance=config.noise_variance,
            )
    except SchedulerConfigError as e:
        raise ExperimentConfigError(str(e)) from e
    attack_result = resolve_attack(config, checkpoint, attack_result)
    threat = build_threat(config, checkpoint) if config.attack_scheme == "noise" else None

    logger.info(
        f"Experiment {config.name}: policy={config.policy} attack={config.attack_scheme} "
        f"slots={config.num_slots} replicas={config.num_resource_blocks} seed={config.seed}"
    )
    seqs = np.random.SeedSequence(config.seed).spawn(config.num_resource_blocks)
    replicas = [
        run_replica(config, b, seq, checkpoint, attack_result, threat)
        for b, seq in enumerate(seqs)
    ]
    return ExperimentReport(
        replicas=replicas,
        bandwidth_mhz=config.bandwidth_mhz,
        labels={
            "name": config.name,
            "policy": config.policy,
            "attack_scheme": config.attack_scheme,
            "num_adversaries": len(config.adversary_users) if config.attack_scheme != "none" else 0,
            "delta_adv": config.delta_adv,
            "delta_vic": config.delta_vic,
            "seed": config.seed,
        },
    )
