"""Shared fixtures for the fluxqit test suite."""

import logging
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest
import yaml

from fluxqit.models.reports import TransferParams
from fluxqit.models.space import SpaceLayout

EXPECTATIONS_FILE = Path(__file__).parent / "expectations.yml"
FROZEN_ATOL = 1e-6

G = 3.0e9
OMEGA = 3.0e10


@pytest.fixture(autouse=True)
def _detach_console_handlers() -> Iterator[None]:
    """Drop the stderr handler a CLI invocation installs once its test is over."""
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)


@pytest.fixture
def layout() -> SpaceLayout:
    return SpaceLayout.qit()


@pytest.fixture
def paper_params() -> TransferParams:
    return TransferParams(g1=G, g2=G, omega=OMEGA)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20241018)


@pytest.fixture
def paper_document() -> str:
    return "schema: 1\ng1: 3.0e9\ng2: 3.0e9\nomega: 3.0e10\nmode: idealized\n"


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[str], Path]:
    """Write a run document into the test's temporary directory."""

    def write(text: str, name: str = "run.yml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--record-expectations",
        action="store_true",
        help="Record derived values missing from tests/expectations.yml instead of failing",
    )


@pytest.fixture(scope="session")
def _expectations(request: pytest.FixtureRequest) -> Iterator[dict[str, list[float]]]:
    data = yaml.safe_load(EXPECTATIONS_FILE.read_text(encoding="utf-8")) or {}
    original = dict(data)
    yield data
    if request.config.getoption("--record-expectations") and data != original:
        EXPECTATIONS_FILE.write_text(yaml.safe_dump(data, sort_keys=True), encoding="utf-8")


@pytest.fixture
def frozen(
    request: pytest.FixtureRequest, _expectations: dict[str, list[float]]
) -> Callable[[str, list[float]], None]:
    """Compare derived values with the recorded ones.

    A name missing from the expectations file fails unless the run was started
    with --record-expectations, which records it instead.
    """
    recording = request.config.getoption("--record-expectations")

    def check(name: str, values: list[float]) -> None:
        values = [float(v) for v in values]
        if name not in _expectations:
            if not recording:
                pytest.fail(f"no recorded value for '{name}'; rerun with --record-expectations")
            _expectations[name] = values
            return
        recorded = _expectations[name]
        assert len(recorded) == len(values), f"{name}: length changed"
        np.testing.assert_allclose(values, recorded, rtol=0.0, atol=FROZEN_ATOL, err_msg=name)

    return check
