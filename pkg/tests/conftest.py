from pathlib import Path

import pytest

from samyield.netlist import load

DESIGNS = Path(__file__).resolve().parent.parent / "designs"


@pytest.fixture
def designs():
    return DESIGNS


@pytest.fixture
def design():
    """Load a bundled design file by stem, e.g. ``design("cantilever")``."""
    return lambda stem: load(DESIGNS / f"{stem}.sam")
