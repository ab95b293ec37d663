"""
Tests for metrics, the evaluation harness, sweeps and report writers.
"""

import json

import pytest
import numpy as np
import pandas as pd

from agents import SacConfig, train
from attack import AttackResult
from channel import generate_csi_trace
from evaluation import (
    COMPARE_SCENARIOS,
    SUMMARY_METRICS,
    ExperimentConfigError,
    ExperimentReport,
    ExperimentReporter,
    MetricsReport,
    UndefinedMetricError,
    compare,
    jfi,
    load_checkpoint,
    pf_score,
    reported_csi,
    resolve_attack,
    run_experiment,
    selection_probability,
    sweep,
    sweep_cells,
    to_mbps,
)
from evaluation.runner import compare_cells
from mdp import reset
from schedulers import MAX_EXHAUSTIVE_USERS
from shared.schemas import ExperimentConfig


def with_update(config: ExperimentConfig, **update) -> ExperimentConfig:
    return ExperimentConfig(**{**config.model_dump(), **update})


def two_user_report(replica: int = 0) -> MetricsReport:
    return MetricsReport(
        victims=(1,),
        selected=[(0,), (0, 1)],
        rates=np.array([[1.0, 0.0], [2.0, 3.0]]),
        pf_scores=np.array([1.0, 2.0]),
        slot_jfi=np.array([0.5, 1.0]),
        final_average_rates=np.array([1.0, 1.0]),
        replica=replica,
    )


@pytest.mark.unit
class TestMetrics:
    """Test metric definitions."""

    def test_jfi_values(self):
        assert jfi(np.array([1.0, 2.0, 3.0])) == pytest.approx(6.0 / 7.0)
        assert jfi(np.ones(5)) == pytest.approx(1.0)

    def test_jfi_single_user_served(self):
        rates = np.zeros(8)
        rates[3] = 2.5
        assert jfi(rates) == pytest.approx(1.0 / 8.0)

    def test_jfi_all_zero(self):
        with pytest.raises(UndefinedMetricError):
            jfi(np.zeros(4))

    def test_pf_score(self):
        score = pf_score(np.array([1.0, 2.0, 3.0]), np.array([0.5, 1.0, 2.0]), (0, 2))
        assert score == pytest.approx(3.5)

    def test_selection_probability(self):
        mask = np.array([[True, False], [True, True]])
        np.testing.assert_allclose(selection_probability(mask), [1.0, 0.5])
        with pytest.raises(UndefinedMetricError):
            selection_probability(np.zeros((0, 3), dtype=bool))

    def test_to_mbps(self):
        assert to_mbps(2.5, 20.0) == pytest.approx(50.0)

    def test_replica_summary(self):
        summary = two_user_report().summary()
        assert summary["mean_pf_score"] == pytest.approx(1.5)
        assert summary["mean_sum_rate"] == pytest.approx(3.0)
        assert summary["final_jfi"] == pytest.approx(1.0)
        assert summary["victim_min_selection"] == pytest.approx(0.5)
        assert summary["victim_mean_rate"] == pytest.approx(1.5)

    def test_no_victims_gives_nan(self):
        report = two_user_report()
        report.victims = ()
        assert np.isnan(report.summary()["victim_min_rate"])

    def test_experiment_report(self):
        report = ExperimentReport(
            replicas=[two_user_report(0), two_user_report(1)],
            bandwidth_mhz=10.0,
            labels={"policy": "sac"},
        )
        summary = report.summary()
        assert summary["policy"] == "sac"
        assert summary["num_replicas"] == 2
        assert summary["mean_sum_mbps"] == pytest.approx(30.0)
        assert summary["victim_min_mbps"] == pytest.approx(15.0)
        assert len(report.slot_frame()) == 4
        users = report.user_frame()
        assert users["victim"].tolist() == [False, True]
        np.testing.assert_allclose(users["selection_probability"], [1.0, 0.5])


@pytest.mark.unit
class TestHarnessInputs:
    """Test checkpoint, attack and CSI plumbing."""

    def test_reported_csi_replaces_adversary_columns(self, rng):
        true_csi = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
        blocks = np.array([0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 9.0, 9.0, 5.0, 6.0, 7.0, 8.0])
        reported = reported_csi(true_csi, (0, 2), blocks)
        np.testing.assert_allclose(reported[:, 0], [1 + 2j, 3 + 4j])
        np.testing.assert_allclose(reported[:, 2], [5 + 6j, 7 + 8j])
        np.testing.assert_array_equal(reported[:, [1, 3]], true_csi[:, [1, 3]])

    def test_reported_csi_truthful(self, rng):
        true_csi = rng.normal(size=(2, 4)) + 0j
        assert reported_csi(true_csi, (0,), None) is true_csi
        assert reported_csi(true_csi, (), np.zeros(6)) is true_csi

    def test_sac_needs_checkpoint_path(self, small_experiment):
        with pytest.raises(ExperimentConfigError, match="checkpoint_path"):
            load_checkpoint(small_experiment)

    def test_missing_checkpoint_file(self, small_experiment, tmp_path):
        config = with_update(small_experiment, checkpoint_path=str(tmp_path / "nope.fggm"))
        with pytest.raises(ExperimentConfigError, match="not found"):
            load_checkpoint(config)

    def test_checkpoint_loaded_from_path(self, small_experiment, checkpoint_file, small_checkpoint):
        config = with_update(small_experiment, checkpoint_path=str(checkpoint_file))
        assert load_checkpoint(config).equals(small_checkpoint)

    def test_checkpoint_dimension_mismatch(self, small_experiment, small_checkpoint):
        config = with_update(small_experiment, num_users=5)
        with pytest.raises(ExperimentConfigError, match="trained for"):
            load_checkpoint(config, small_checkpoint)

    def test_baselines_need_no_checkpoint(self, small_experiment):
        assert load_checkpoint(with_update(small_experiment, policy="opt_pf")) is None

    def test_attack_result_scheme_mismatch(self, small_experiment, small_checkpoint):
        config = with_update(small_experiment, attack_scheme="fggm")
        result = AttackResult(
            scheme="spgd", adversaries=(0, 1), o_adv=np.zeros(12), best_objective=0.0, best_restart=0,
        )
        with pytest.raises(ExperimentConfigError, match="spgd"):
            resolve_attack(config, small_checkpoint, result)

    def test_attack_result_adversary_mismatch(self, small_experiment, small_checkpoint):
        config = with_update(small_experiment, attack_scheme="fggm")
        result = AttackResult(
            scheme="fggm", adversaries=(2, 3), o_adv=np.zeros(12), best_objective=0.0, best_restart=0,
        )
        with pytest.raises(ExperimentConfigError, match="adversaries"):
            resolve_attack(config, small_checkpoint, result)

    def test_attack_result_loaded_from_file(self, small_experiment, small_checkpoint, tmp_path):
        config = with_update(small_experiment, attack_scheme="fggm")
        computed = resolve_attack(config, small_checkpoint)
        path = computed.save_json(tmp_path / "attack.json")
        loaded = resolve_attack(with_update(config, attack_result_path=str(path)), small_checkpoint)
        np.testing.assert_allclose(loaded.o_adv, computed.o_adv)

    def test_no_precomputed_attack_for_noise(self, small_experiment, small_checkpoint):
        config = with_update(small_experiment, attack_scheme="noise")
        assert resolve_attack(config, small_checkpoint) is None


@pytest.mark.integration
class TestRunExperiment:
    """Test full runs at toy scale."""

    @pytest.mark.parametrize("policy", ["random", "opt_pf", "opt_mr", "opt_pf_ug"])
    def test_baselines(self, small_experiment, policy):
        report = run_experiment(with_update(small_experiment, policy=policy))
        summary = report.summary()
        assert summary["policy"] == policy
        assert summary["num_adversaries"] == 0
        assert 0.25 - 1e-12 <= summary["final_jfi"] <= 1.0 + 1e-12
        assert len(report.slot_frame()) == small_experiment.num_slots
        assert all(1 <= len(s) <= 2 for s in report.replicas[0].selected)

    @pytest.mark.parametrize("scheme", ["none", "noise", "fggm", "spgd"])
    def test_sac_under_attack(self, small_experiment, small_checkpoint, scheme):
        config = with_update(small_experiment, attack_scheme=scheme)
        summary = run_experiment(config, checkpoint=small_checkpoint).summary()
        assert summary["attack_scheme"] == scheme
        assert summary["num_adversaries"] == (0 if scheme == "none" else 2)
        assert np.isfinite(summary["mean_pf_score"])
        assert 0.0 <= summary["victim_min_selection"] <= summary["victim_mean_selection"] <= 1.0

    @pytest.mark.parametrize("scheme", ["none", "noise", "fggm"])
    def test_runs_repeat_exactly(self, small_experiment, small_checkpoint, scheme):
        config = with_update(small_experiment, attack_scheme=scheme)
        a = run_experiment(config, checkpoint=small_checkpoint)
        b = run_experiment(config, checkpoint=small_checkpoint)
        pd.testing.assert_frame_equal(a.slot_frame(), b.slot_frame())

    def test_seed_changes_channel(self, small_experiment):
        config = with_update(small_experiment, policy="opt_pf")
        a = run_experiment(config).slot_frame()
        b = run_experiment(with_update(config, seed=6)).slot_frame()
        assert not np.allclose(a["pf_score"], b["pf_score"])

    def test_resource_blocks_are_replicas(self, small_experiment):
        config = with_update(small_experiment, policy="random", num_resource_blocks=2)
        report = run_experiment(config)
        assert report.summary()["num_replicas"] == 2
        frame = report.slot_frame()
        assert sorted(frame["replica"].unique()) == [0, 1]
        assert not np.allclose(
            frame.loc[frame["replica"] == 0, "pf_score"].to_numpy(),
            frame.loc[frame["replica"] == 1, "pf_score"].to_numpy(),
        )

    def test_exhaustive_policy_too_large(self):
        config = ExperimentConfig(num_users=MAX_EXHAUSTIVE_USERS + 1, max_selected=2, policy="opt_pf", num_slots=2)
        with pytest.raises(ExperimentConfigError):
            run_experiment(config)


@pytest.fixture(scope="module")
def trained_lab():
    """(experiment, checkpoint) for an L=4, M=2, N=2 scheduler after 2000 steps."""
    experiment = ExperimentConfig(
        name="trained",
        num_users=4,
        num_antennas=2,
        max_selected=2,
        proto_dims=2,
        knn_k=10,
        num_slots=200,
        num_adversaries=2,
        delta_adv=3.0,
        delta_vic=1.5,
        restarts=3,
        iterations=30,
        step_size=0.1,
        seed=11,
    )
    sac = SacConfig(
        proto_dims=2,
        knn_k=10,
        actor_hidden=(32, 32),
        critic_hidden=(64, 64),
        replay_capacity=5000,
        batch_size=32,
        actor_lr=1e-3,
        critic_lr=1e-3,
        total_steps=2000,
        warmup_steps=300,
        episode_length=50,
        log_interval=500,
        seed=0,
    )
    env_config = experiment.env_config()

    def make(episode: int):
        trace = generate_csi_trace(experiment.channel_config(1000 + episode), sac.episode_length + 1)
        return reset(env_config, trace)

    return experiment, train(make, sac, env_config)


@pytest.mark.slow
@pytest.mark.integration
class TestTrainedScheduler:
    """Directional checks on a briefly trained scheduler.

    Short training is noisy, so each comparison allows a 5% margin.
    """

    def test_not_worse_than_uniform_scheduling(self, trained_lab):
        experiment, checkpoint = trained_lab
        sac = run_experiment(experiment, checkpoint=checkpoint).summary()
        uniform = run_experiment(with_update(experiment, policy="random")).summary()
        assert sac["mean_pf_score"] >= 0.95 * uniform["mean_pf_score"]

    def test_fggm_does_not_raise_victim_selection(self, trained_lab):
        experiment, checkpoint = trained_lab
        clean = run_experiment(experiment, checkpoint=checkpoint).summary()
        attacked = run_experiment(with_update(experiment, attack_scheme="fggm"), checkpoint=checkpoint).summary()
        assert attacked["victim_mean_selection"] <= clean["victim_mean_selection"] + 0.05


@pytest.mark.integration
class TestRunner:
    """Test sweeps and the scheduler comparison."""

    def test_delta_grid_cells(self, small_experiment):
        config = with_update(small_experiment, delta_grid=(0.5, 1.0), sweep_seeds=2)
        cells = sweep_cells(config)
        assert len(cells) == 8
        assert {c.seed for c in cells} == {5, 6}

    def test_compare_cells(self, small_experiment):
        cells = compare_cells(small_experiment)
        assert [tuple(dict(c.labels).values()) for c in cells] == list(COMPARE_SCENARIOS)

    def test_delta_sweep(self, small_experiment, small_checkpoint):
        config = with_update(small_experiment, attack_scheme="fggm", delta_grid=(0.5, 1.0))
        result = sweep(config, small_checkpoint)
        assert len(result.rows) == 4
        assert len(result.failures) == 0
        assert list(result.cells["num_seeds"]) == [1, 1, 1, 1]
        assert set(SUMMARY_METRICS) <= set(result.cells.columns)

    def test_failing_cell_is_recorded(self, small_experiment, small_checkpoint):
        config = with_update(
            small_experiment,
            attack_scheme="fggm",
            sweep_axis="num_adversaries",
            adversary_counts=(1, 4),
        )
        result = sweep(config, small_checkpoint)
        assert len(result.rows) == 2
        failed = result.failures
        assert list(failed["num_adversaries"]) == [4]
        assert "AttackContractError" in failed["error"].iloc[0]
        assert list(result.cells["num_adversaries"]) == [1]

    def test_compare(self, small_experiment, small_checkpoint):
        rows = compare(small_experiment, small_checkpoint)
        assert list(zip(rows["policy"], rows["attack_scheme"])) == list(COMPARE_SCENARIOS)
        assert (rows["error"] == "").all()
        assert rows[SUMMARY_METRICS].notna().all().all()


@pytest.mark.unit
class TestReporters:
    """Test the CSV artefacts of one run."""

    def test_writes_three_tables(self, small_experiment, tmp_path):
        report = run_experiment(with_update(small_experiment, policy="random"))
        paths = ExperimentReporter(tmp_path / "out").write(report)
        assert set(paths) == {"metrics", "users", "summary", "summary_json"}
        assert json.loads(paths["summary_json"].read_text())["policy"] == "random"
        metrics = pd.read_csv(paths["metrics"])
        assert len(metrics) == small_experiment.num_slots
        assert {"slot", "selected", "pf_score", "jfi", "rate_3"} <= set(metrics.columns)
        assert len(pd.read_csv(paths["users"])) == 4
        summary = pd.read_csv(paths["summary"])
        assert summary["policy"].iloc[0] == "random"

    def test_identical_runs_identical_files(self, small_experiment, tmp_path):
        config = with_update(small_experiment, policy="opt_pf")
        a = ExperimentReporter(tmp_path / "a").write(run_experiment(config))
        b = ExperimentReporter(tmp_path / "b").write(run_experiment(config))
        for key in a:
            assert a[key].read_bytes() == b[key].read_bytes()
