"""
Tests for configuration loading.

Tests flat YAML lab configs, environment substitution, CLI-style overrides
and process settings.
"""

import pytest
from pathlib import Path

from fggm_lab.workflows import resolve_output_dir
from shared.config_loader import ConfigLoader, LabConfigError, build_lab_config, load_lab_config
from shared.settings import get_settings


CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


def write_yaml(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "lab.yaml"
    path.write_text(text)
    return path


@pytest.mark.unit
class TestLabConfigLoading:
    """Test loading lab config files."""

    def test_defaults_without_file(self):
        lab = load_lab_config()
        assert lab.experiment.num_users == 8
        assert lab.experiment.max_selected == 4
        assert lab.sac.total_steps == 60_000
        assert lab.source is None

    @pytest.mark.parametrize("name", ["lab_l8.yaml", "quick.yaml", "sweep_delta.yaml", "sweep_adversaries.yaml"])
    def test_shipped_configs_validate(self, name):
        lab = load_lab_config(str(CONFIG_DIR / name))
        assert lab.source == CONFIG_DIR / name
        assert lab.experiment.max_selected <= lab.experiment.num_users

    def test_quick_config_values(self):
        lab = load_lab_config(str(CONFIG_DIR / "quick.yaml"))
        assert lab.experiment.num_users == 4
        assert lab.sac.actor_hidden == (16,)
        assert lab.experiment.adversary_users == (0, 1)

    def test_shared_keys_reach_both_models(self, tmp_path):
        lab = load_lab_config(str(write_yaml(tmp_path, "proto_dims: 2\nknn_k: 5\nseed: 4\n")))
        assert lab.experiment.proto_dims == lab.sac.proto_dims == 2
        assert lab.experiment.knn_k == lab.sac.knn_k == 5
        assert lab.experiment.seed == lab.sac.seed == 4

    def test_empty_file_gives_defaults(self, tmp_path):
        lab = load_lab_config(str(write_yaml(tmp_path, "")))
        assert lab.experiment == load_lab_config().experiment

    def test_unknown_key(self, tmp_path):
        with pytest.raises(LabConfigError, match="learning_rate"):
            load_lab_config(str(write_yaml(tmp_path, "learning_rate: 0.1\n")))

    def test_nested_section_rejected(self, tmp_path):
        with pytest.raises(LabConfigError, match="flat"):
            load_lab_config(str(write_yaml(tmp_path, "attack:\n  scheme: fggm\n")))

    def test_non_mapping_rejected(self, tmp_path):
        with pytest.raises(LabConfigError, match="mapping"):
            load_lab_config(str(write_yaml(tmp_path, "- 1\n- 2\n")))

    def test_invalid_value_names_file(self, tmp_path):
        path = write_yaml(tmp_path, "num_users: 2\nmax_selected: 3\n")
        with pytest.raises(LabConfigError, match="lab.yaml"):
            load_lab_config(str(path))

    def test_invalid_sac_value(self):
        with pytest.raises(LabConfigError):
            build_lab_config({"discount": 2.0})

    def test_missing_file(self, tmp_path):
        with pytest.raises(LabConfigError, match="not found"):
            load_lab_config(str(tmp_path / "missing.yaml"))


@pytest.mark.unit
class TestEnvSubstitution:
    """Test ${VAR} replacement."""

    def test_substituted_number_stays_number(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FGGM_TEST_SLOTS", "7")
        lab = load_lab_config(str(write_yaml(tmp_path, "num_slots: ${FGGM_TEST_SLOTS}\n")))
        assert lab.experiment.num_slots == 7

    def test_substituted_inside_string(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FGGM_TEST_ROOT", "/data/runs")
        lab = load_lab_config(str(write_yaml(tmp_path, "output_dir: ${FGGM_TEST_ROOT}/l8\n")))
        assert lab.experiment.output_dir == "/data/runs/l8"

    def test_unknown_variable_left_as_written(self, tmp_path, monkeypatch):
        monkeypatch.delenv("FGGM_TEST_UNSET", raising=False)
        data = ConfigLoader().load(str(write_yaml(tmp_path, "name: ${FGGM_TEST_UNSET}\n")))
        assert data["name"] == "${FGGM_TEST_UNSET}"

    def test_list_values(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FGGM_TEST_DELTA", "0.25")
        data = ConfigLoader().load(str(write_yaml(tmp_path, "delta_grid:\n  - ${FGGM_TEST_DELTA}\n  - 1.0\n")))
        assert data["delta_grid"] == [0.25, 1.0]


@pytest.mark.unit
class TestOverrides:
    """Test flag overrides on a loaded config."""

    def test_none_values_keep_config(self):
        lab = load_lab_config()
        assert lab.with_overrides(seed=None, policy=None) is lab

    def test_seed_override_reaches_both_models(self):
        lab = load_lab_config().with_overrides(seed=9)
        assert lab.experiment.seed == 9
        assert lab.sac.seed == 9

    def test_override_is_validated(self):
        with pytest.raises(LabConfigError):
            load_lab_config().with_overrides(attack_scheme="pgd")

    def test_unset_explicit_adversaries(self):
        lab = build_lab_config({"adversaries": [5, 6]})
        assert lab.experiment.adversary_users == (5, 6)
        updated = lab.with_overrides(unset=["adversaries"], num_adversaries=3)
        assert updated.experiment.adversary_users == (0, 1, 2)
        assert updated.experiment.victim_users == (3, 4, 5, 6, 7)


@pytest.mark.unit
class TestSettings:
    """Test environment-driven process settings."""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("FGGM_LAB_OUTPUT_DIR", raising=False)
        monkeypatch.delenv("FGGM_LAB_LOG_LEVEL", raising=False)
        settings = get_settings()
        assert settings.output_dir is None
        assert settings.log_level == "INFO"

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("FGGM_LAB_OUTPUT_DIR", "/tmp/fggm")
        monkeypatch.setenv("FGGM_LAB_LOG_LEVEL", "debug")
        settings = get_settings()
        assert settings.output_dir == "/tmp/fggm"
        assert settings.log_level == "debug"

    def test_output_dir_precedence(self):
        assert resolve_output_dir("flag", "env", "config") == Path("flag")
        assert resolve_output_dir(None, "env", "config") == Path("env")
        assert resolve_output_dir(None, None, "config") == Path("config")
