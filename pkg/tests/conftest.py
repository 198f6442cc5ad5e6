import numpy as np
import pytest

from rootcma.array_model import ArrayGeometry, Scenario, SourceConfig

SPACED_ANGLES = (-53.2, 3.23, 20.0)

_VERDICTS: dict[int, str] = {}


def record_verdict(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    _VERDICTS[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[n])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def geo8():
    return ArrayGeometry(8, 0.5)


def three_source_scenario(snr_db=np.inf, amplitudes=(1.0, 1.0, 1.0), seed=1, num_snapshots=8000):
    sources = tuple(SourceConfig(a, c) for a, c in zip(SPACED_ANGLES, amplitudes))
    return Scenario(ArrayGeometry(8, 0.5), sources, snr_db=snr_db, num_snapshots=num_snapshots, seed=seed)
