import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_addoption(parser):
    parser.addoption("--skip-acceptance", action="store_true", default=False,
                     help="skip the heavyweight acceptance criteria")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--skip-acceptance"):
        marker = pytest.mark.skip(reason="--skip-acceptance")
        for item in items:
            if "acceptance" in item.keywords:
                item.add_marker(marker)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-scale acceptance criteria")
