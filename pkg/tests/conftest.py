import numpy as np
import pytest

from tagc.image import ImagePlanar, save_image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_image(rng):
    def make(h=32, w=32, channels=3):
        return ImagePlanar(rng.random((channels, h, w)))

    return make


@pytest.fixture
def write_png(tmp_path):
    def write(img, name="img.png"):
        path = tmp_path / name
        save_image(img, path)
        return path

    return write


# One line per acceptance criterion, collected by test_acceptance.py.
ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{status:4s}  {name}: {detail}")
