"""Unit tests for settings.py — layered run settings."""
import pytest

from hybrid_linsolve.config import DEFAULT_EPSILON
from hybrid_linsolve.errors import ContractError
from hybrid_linsolve.settings import RunInputs, load_config_file, resolve


def _write(tmp_path, body: str):
    path = tmp_path / "run.toml"
    path.write_text(body)
    return path


class TestResolve:
    def test_defaults(self):
        settings = resolve(RunInputs(seed=1))
        assert settings.epsilon == DEFAULT_EPSILON
        assert settings.sources["epsilon"] == "default"
        assert settings.sources["seed"] == "flag"

    def test_flag_beats_file(self):
        settings = resolve(RunInputs(epsilon=0.2, seed=1), {"epsilon": 0.3, "mode": "sampled"})
        assert settings.epsilon == 0.2
        assert settings.sources["epsilon"] == "flag"
        assert settings.mode == "sampled"
        assert settings.sources["mode"] == "file"

    def test_random_seed_recorded(self):
        settings = resolve(RunInputs())
        assert settings.sources["seed"] == "random"
        assert 0 <= settings.seed < 2 ** 32

    def test_log_level_upper_cased(self):
        assert resolve(RunInputs(seed=0, log_level="debug")).log_level == "DEBUG"

    @pytest.mark.parametrize("inputs", [
        RunInputs(seed=0, mode="fast"),
        RunInputs(seed=0, construction="teleport"),
        RunInputs(seed=0, log_level="loud"),
        RunInputs(seed=0, epsilon=-1.0),
        RunInputs(seed=0, construction="lattice"),
    ])
    def test_rejects(self, inputs):
        with pytest.raises(ContractError):
            resolve(inputs)

    @pytest.mark.parametrize("inputs,expected", [
        (RunInputs(seed=0), "naive"),
        (RunInputs(seed=0, construction="ancilla", ancillas=3), "ancilla(s=3)"),
        (RunInputs(seed=0, construction="lattice", l1=2, l2=3), "lattice(2×3)"),
    ])
    def test_strategy(self, inputs, expected):
        assert resolve(inputs).strategy().describe() == expected

    def test_solve_config(self):
        config = resolve(RunInputs(seed=5, shots=100, mode="sampled", workers=2)).solve_config()
        assert (config.seed, config.shot_override, config.mode, config.workers) == (5, 100, "sampled", 2)

    def test_to_dict(self):
        data = resolve(RunInputs(seed=3)).to_dict()
        assert data["seed"] == 3
        assert data["sources"]["seed"] == "flag"


class TestLoadConfigFile:
    def test_reads_section(self, tmp_path):
        path = _write(tmp_path, '[solve]\nepsilon = 0.05\nmode = "sampled"\nexact_diagonal = true\n')
        assert load_config_file(path) == {"epsilon": 0.05, "mode": "sampled", "exact_diagonal": True}

    def test_missing_section_is_empty(self, tmp_path):
        assert load_config_file(_write(tmp_path, "[other]\nx = 1\n")) == {}

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ContractError, match="Valid keys"):
            load_config_file(_write(tmp_path, "[solve]\nepsilon_max = 1.0\n"))

    def test_wrong_type(self, tmp_path):
        with pytest.raises(ContractError, match="must be int"):
            load_config_file(_write(tmp_path, '[solve]\nseed = "abc"\n'))

    def test_bool_is_not_a_number(self, tmp_path):
        with pytest.raises(ContractError, match="boolean"):
            load_config_file(_write(tmp_path, "[solve]\nshots = true\n"))

    def test_bad_toml(self, tmp_path):
        with pytest.raises(ContractError, match="not valid TOML"):
            load_config_file(_write(tmp_path, "[solve\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ContractError, match="cannot read"):
            load_config_file(tmp_path / "absent.toml")

    def test_file_values_flow_into_resolve(self, tmp_path):
        path = _write(tmp_path, "[solve]\nseed = 11\nbudget_scale = 0.5\n")
        settings = resolve(RunInputs(), load_config_file(path))
        assert settings.seed == 11
        assert settings.sources["seed"] == "file"
        assert settings.budget_scale == 0.5
