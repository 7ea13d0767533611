"""
Test suite for configuration parsing and validation.
"""
from pathlib import Path

import pytest

from src.core.config import load_config, resolve_output_dir, validate_config
from src.core.exceptions import ConfigError
from src.core.models.schemas import (
    ALPHA_MAX,
    ALPHA_MIN,
    DEFAULT_SEED,
    CoefficientPreset,
    ExperimentName,
    Pairing,
)

MINIMAL = """
[experiment]
experiment = example41
"""


class TestValidateConfig:
    """INI text to ExperimentConfig"""

    def test_defaults(self):
        """Test the defaults of a minimal file"""
        config = validate_config(MINIMAL)
        assert config.experiment is ExperimentName.EXAMPLE41
        assert config.seed == DEFAULT_SEED
        assert config.workers == 1
        assert config.n_steps == 1024
        assert config.coefficients is CoefficientPreset.OU_TYPE
        assert config.pairing is Pairing.COMMON

    def test_full_config(self):
        """Test a file that sets every section"""
        raw = """
[experiment]
experiment = sde_weak_rate
seed = 7
workers = 4

[model]
alpha_grid = 1.7, 1.8, 1.9
beta = 0.0, 0.5
dimension = 2
coefficients = bounded_smooth

[simulation]
T = 2.0
n_steps = 128
n_paths = 5000
taming = true

[numerics]
t = 0.25
"""
        config = validate_config(raw)
        assert config.alpha_grid == (1.7, 1.8, 1.9)
        assert config.betas() == (0.0, 0.5)
        assert config.T == 2.0
        assert config.t == 0.25
        assert config.taming is True
        assert config.workers == 4

    def test_alpha_two_rejected(self):
        """Test that alpha = 2 in the grid is rejected with field and line"""
        raw = MINIMAL + "\n[model]\nalpha_grid = 1.8, 2.0\n"
        with pytest.raises(ConfigError) as exc:
            validate_config(raw)
        assert exc.value.field == "alpha_grid"
        assert "legal range" in str(exc.value)
        assert exc.value.line == 6

    @pytest.mark.parametrize("alpha", ["1.0000001", "1.9999999995"])
    def test_alpha_next_to_the_endpoints_rejected(self, alpha):
        """Test that grid values the engines refuse never pass validation"""
        with pytest.raises(ConfigError) as exc:
            validate_config(MINIMAL + f"\n[model]\nalpha_grid = {alpha}\n")
        assert exc.value.field == "alpha_grid"

    def test_alpha_at_the_legal_bounds_accepted(self):
        """Test the closed bounds shared with check_alpha"""
        config = validate_config(MINIMAL + f"\n[model]\nalpha_grid = {ALPHA_MIN!r}, {ALPHA_MAX!r}\n")
        assert config.alpha_grid == (ALPHA_MIN, ALPHA_MAX)

    def test_decreasing_grid_rejected(self):
        """Test that a decreasing grid is rejected"""
        with pytest.raises(ConfigError):
            validate_config(MINIMAL + "\n[model]\nalpha_grid = 1.9, 1.8\n")

    def test_zero_workers_rejected(self):
        """Test that workers = 0 names the workers field"""
        with pytest.raises(ConfigError) as exc:
            validate_config(MINIMAL + "workers = 0\n")
        assert exc.value.field == "workers"

    def test_unknown_key(self):
        """Test that an unknown key is rejected by name"""
        with pytest.raises(ConfigError) as exc:
            validate_config(MINIMAL + "colour = blue\n")
        assert exc.value.field == "colour"
        assert "unknown key" in str(exc.value)

    def test_unknown_experiment(self):
        """Test that an unknown experiment is rejected"""
        with pytest.raises(ConfigError) as exc:
            validate_config("[experiment]\nexperiment = nonsense\n")
        assert exc.value.field == "experiment"

    def test_key_outside_section(self):
        """Test that a key before any section reports line 1"""
        with pytest.raises(ConfigError) as exc:
            validate_config("seed = 3\n[experiment]\nexperiment = example41\n")
        assert exc.value.line == 1

    def test_unknown_section(self):
        """Test that an unknown section is rejected"""
        with pytest.raises(ConfigError):
            validate_config(MINIMAL + "\n[extras]\nfoo = 1\n")

    def test_horizon_and_time_consistency(self):
        """Test that t must lie below T"""
        with pytest.raises(ConfigError):
            validate_config(MINIMAL + "\n[simulation]\nT = 1.0\n\n[numerics]\nt = 1.5\n")

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises ConfigError"""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.ini")

    def test_shipped_configs_are_valid(self):
        """Test every shipped configuration"""
        configs = sorted(Path(__file__).resolve().parents[2].joinpath("configs").glob("*.ini"))
        assert configs
        for path in configs:
            assert load_config(path).experiment.value == path.stem


class TestOutputDirectory:
    """Flag > OUTPUT_DIR > config > default"""

    def setup_method(self):
        self.config = validate_config(MINIMAL + "output_dir = from_config\n")

    def test_flag_wins(self, monkeypatch, tmp_path):
        """Test that the flag beats the environment"""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("OUTPUT_DIR", "from_env")
        assert resolve_output_dir(self.config, Path("from_flag")) == Path("from_flag")

    def test_environment_over_config(self, monkeypatch, tmp_path):
        """Test that OUTPUT_DIR beats the config file"""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("OUTPUT_DIR", "from_env")
        assert resolve_output_dir(self.config) == Path("from_env")

    def test_config_value(self, monkeypatch, tmp_path):
        """Test the config value without an environment override"""
        monkeypatch.chdir(tmp_path)
        monkeypatch.delenv("OUTPUT_DIR", raising=False)
        assert resolve_output_dir(self.config) == Path("from_config")

    def test_default(self, monkeypatch, tmp_path):
        """Test the results default"""
        monkeypatch.chdir(tmp_path)
        monkeypatch.delenv("OUTPUT_DIR", raising=False)
        assert resolve_output_dir(validate_config(MINIMAL)) == Path("results")
