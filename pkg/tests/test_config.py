"""Tests for run document parsing and validation."""

import math
from collections.abc import Callable
from pathlib import Path

import pytest

from fluxqit.core.errors import ConfigError
from fluxqit.helpers.config import dump_config, load_config, parse_config
from fluxqit.models.enums import (
    CardinalState,
    CouplingModel,
    ExecutionMode,
    LogLevel,
    StepLabel,
    SweepAxis,
    TransferDirection,
)

CONFIG_DIR = Path(__file__).parent.parent / "configs"


class TestParseConfig:
    def test_minimal_document(self, paper_document: str) -> None:
        config = parse_config(paper_document)
        assert config.schema_version == 1
        assert config.g1 == 3.0e9
        assert config.n_max == 2
        assert config.mode == ExecutionMode.IDEALIZED
        assert config.open_coupling == CouplingModel.FULL
        assert config.direction == TransferDirection.FORWARD
        assert config.inputs == list(CardinalState)
        assert config.integrator.dt is None
        assert config.grid == {}
        assert config.logging.level == LogLevel.WARNING

    def test_exponent_without_dot(self) -> None:
        config = parse_config("schema: 1\ng1: 3e9\ng2: 3e9\nomega: 3e10\n")
        assert config.omega == 3.0e10

    def test_complex_inputs(self, paper_document: str) -> None:
        document = paper_document + (
            "inputs:\n"
            "  - {label: a, alpha: 0.6, beta: 0.8i}\n"
            "  - {alpha: '0.6+0j', beta: [0, 0.8]}\n"
            "  - 0\n"
            "  - '+i'\n"
        )
        states = parse_config(document).input_states()
        assert [s.label for s in states] == ["a", "input1", "0", "+i"]
        assert states[0].beta == 0.8j
        assert states[1].beta == 0.8j
        assert states[3].beta == pytest.approx(1j / math.sqrt(2))

    def test_unnormalized_input(self, paper_document: str) -> None:
        with pytest.raises(ConfigError, match="inputs"):
            parse_config(paper_document + "inputs:\n  - {alpha: 0.6, beta: 0.6}\n")

    def test_rate_and_lifetime_conflict(self, paper_document: str) -> None:
        with pytest.raises(ConfigError, match="gamma_3r"):
            parse_config(paper_document + "noise:\n  gamma_3r: 1.0e6\n  t1_3: 1.0e-6\n")

    def test_lifetimes_become_rates(self, paper_document: str) -> None:
        document = paper_document.replace("idealized", "open") + (
            "noise:\n  t1_3: 1.0e-6\n  t_phi_3: 2.0e-6\n  kappa: 5.0e5\n"
        )
        noise = parse_config(document).transfer_params().noise
        assert noise.gamma_3r == pytest.approx(1.0e6)
        assert noise.gamma_3p == pytest.approx(5.0e5)
        assert noise.kappa == 5.0e5

    def test_kappa_from_quality_factor(self, paper_document: str) -> None:
        document = paper_document.replace("idealized", "open") + (
            "cavity:\n  q_factor: 2.0e4\n  nu_c: 3.0e9\n"
        )
        kappa = parse_config(document).transfer_params().noise.kappa
        assert 1.0 / kappa == pytest.approx(1.06e-6, rel=1e-2)

    def test_explicit_cavity_rate_wins(self, paper_document: str) -> None:
        document = paper_document.replace("idealized", "open") + (
            "cavity:\n  q_factor: 2.0e4\n  nu_c: 3.0e9\nnoise:\n  t_cavity: 1.0e-5\n"
        )
        assert parse_config(document).transfer_params().noise.kappa == pytest.approx(1.0e5)

    def test_closed_mode_keeps_kappa_unset(self, paper_document: str) -> None:
        config = parse_config(paper_document + "cavity:\n  q_factor: 2.0e4\n  nu_c: 3.0e9\n")
        assert config.derived_kappa is None

    def test_branching_must_sum_to_one(self, paper_document: str) -> None:
        with pytest.raises(ConfigError, match="branch"):
            parse_config(paper_document + "noise:\n  branch_3_to_2: 0.5\n")

    def test_overrides_and_direction(self, paper_document: str) -> None:
        document = paper_document + "direction: reverse\nrabi_overrides:\n  1c: 1.5e10\n"
        params = parse_config(document).transfer_params()
        assert params.direction == TransferDirection.REVERSE
        assert params.rabi_overrides == {StepLabel.STEP_1C: 1.5e10}

    def test_grid(self, paper_document: str) -> None:
        config = parse_config(paper_document + "grid:\n  omega_over_g: [5, 10]\n")
        assert config.grid == {SweepAxis.OMEGA_OVER_G: [5.0, 10.0]}

    def test_unknown_grid_axis(self, paper_document: str) -> None:
        with pytest.raises(ConfigError, match="grid"):
            parse_config(paper_document + "grid:\n  temperature: [1.0]\n")

    def test_empty_grid_axis(self, paper_document: str) -> None:
        with pytest.raises(ConfigError, match="no values"):
            parse_config(paper_document + "grid:\n  kappa: []\n")

    def test_spectators(self, paper_document: str) -> None:
        document = paper_document + (
            "spectators:\n  - {qubit: 0, transition: [1, 3], strength: 3.0e9, detuning: 1.5e11}\n"
        )
        (spectator,) = parse_config(document).transfer_params().spectators
        assert spectator.transition == (1, 3)

    def test_resonant_spectator_rejected(self, paper_document: str) -> None:
        document = paper_document + (
            "spectators:\n  - {qubit: 0, transition: [2, 3], strength: 3.0e9, detuning: 1.0e10}\n"
        )
        with pytest.raises(ConfigError, match="spectators"):
            parse_config(document)

    @pytest.mark.parametrize(
        ("document", "message"),
        [
            ("g1: 3.0e9\ng2: 3.0e9\nomega: 3.0e10\n", "schema"),
            ("schema: 2\ng1: 3.0e9\ng2: 3.0e9\nomega: 3.0e10\n", "schema"),
            ("- just\n- a list\n", "mapping"),
            ("schema: 1\ng1: [unclosed\n", "YAML"),
            ("schema: 1\ng1: 3.0e9\ng2: 3.0e9\n", "omega"),
            ("schema: 1\ng1: -3.0e9\ng2: 3.0e9\nomega: 3.0e10\n", "g1"),
            ("schema: 1\ng1: 3.0e9\ng2: 3.0e9\nomega: 3.0e10\ncolour: red\n", "colour"),
            ("schema: 1\ng1: 3.0e9\ng2: 3.0e9\nomega: 3.0e10\nmode: lossy\n", "mode"),
            ("schema: 1\ng1: 3.0e9\ng2: 3.0e9\nomega: 3.0e10\ninputs: []\n", "inputs"),
        ],
    )
    def test_rejected_documents(self, document: str, message: str) -> None:
        with pytest.raises(ConfigError, match=message):
            parse_config(document)


class TestEnvironment:
    def test_variables_expanded(
        self, paper_document: str, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("FLUXQIT_TEST_G2", "1.5e9")
        config = parse_config(paper_document.replace("g2: 3.0e9", "g2: ${FLUXQIT_TEST_G2}"))
        assert config.g2 == 1.5e9

    def test_dotenv_file(
        self,
        tmp_path: Path,
        write_config: Callable[[str], Path],
        paper_document: str,
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        # registered so the value dotenv sets is removed again afterwards
        monkeypatch.setenv("FLUXQIT_TEST_OMEGA", "unused")
        monkeypatch.delenv("FLUXQIT_TEST_OMEGA")
        env_file = tmp_path / ".env"
        env_file.write_text("FLUXQIT_TEST_OMEGA=6.0e10\n", encoding="utf-8")
        path = write_config(paper_document.replace("omega: 3.0e10", "omega: ${FLUXQIT_TEST_OMEGA}"))
        assert load_config(path, env_path=env_file).omega == 6.0e10


class TestLoadAndDump:
    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.yml", env_path=None)

    def test_dump_round_trip(self, paper_document: str) -> None:
        document = paper_document + (
            "direction: reverse\n"
            "rabi_overrides: {2a: 2.0e10}\n"
            "noise: {t1_3: 1.0e-6, gamma_3p: 1.0e6}\n"
            "cavity: {q_factor: 2.0e4, nu_c: 3.0e9}\n"
            "inputs: ['+', {label: c, alpha: 0.6, beta: 0.8i}]\n"
            "spectators:\n  - {qubit: 1, transition: [0, 1], strength: 1.0e8, detuning: -2.0e10}\n"
            "grid: {omega_over_g: [5, 10]}\n"
        )
        config = parse_config(document)
        assert parse_config(dump_config(config)) == config

    def test_canonical_json_is_stable(self, paper_document: str) -> None:
        first = parse_config(paper_document).canonical_json()
        second = parse_config(paper_document + "n_max: 2\n").canonical_json()
        assert first == second
        assert "\n" not in first

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yml")), ids=lambda p: p.name)
    def test_shipped_configs(self, path: Path) -> None:
        assert load_config(path, env_path=None).schema_version == 1
