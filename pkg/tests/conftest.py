import numpy as np
import pytest

from privlens.model import RasterImage, RegionMask

# verdict lines from the acceptance suite, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h, w):
    return RasterImage(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


def random_mask(rng, h, w, p=0.4):
    return RegionMask(rng.random((h, w)) < p)


@pytest.fixture(scope="session")
def toy_root(tmp_path_factory):
    """One full toy pipeline run shared by the report and CLI tests."""
    from privlens.toy import run_toy_pipeline

    root = tmp_path_factory.mktemp("toy")
    run_toy_pipeline(root)
    return root
