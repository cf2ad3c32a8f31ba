import pytest


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False, help="run hours-scale reproductions")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip = pytest.mark.skip(reason="hours-scale; pass --long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)
