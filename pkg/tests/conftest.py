import numpy as np
import pytest

from wulffflow import Anisotropy, build_sphere_grid

HARMONIC_TERMS = {(2, 0): 1.0, (2, 2): 0.5, (3, 1): 0.5}


@pytest.fixture(scope="session")
def round_f():
    return Anisotropy.round()


@pytest.fixture(scope="session")
def ellipsoid_f():
    return Anisotropy.ellipsoid([2.0, 1.0, 1.0])


@pytest.fixture(scope="session")
def harmonic_f():
    return Anisotropy.harmonic(HARMONIC_TERMS, 0.05)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng, count, dim=3):
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def full_grid(n_theta):
    return build_sphere_grid("full", n_theta)


def refinement_order(errors):
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


ACCEPTANCE: list[tuple[int, str]] = []


@pytest.fixture(scope="session")
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; returns the flag."""
    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE.append((number, line))
        print(line)
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
