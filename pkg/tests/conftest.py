import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cmvkit.coefficients import CoefficientSchedule

settings.register_profile(
    "cmvkit",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cmvkit")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_schedule(rng, lo, hi, radius=0.95, phases=True):
    return CoefficientSchedule.random(rng, lo, hi, radius=radius, phases=phases)


def random_disk(rng, radius=0.9):
    return radius * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())


ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
