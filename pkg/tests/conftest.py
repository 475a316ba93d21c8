import math
import os

os.environ["LAB_ENV"] = "test"
os.environ.pop("OTEL_EXPORTER_OTLP_ENDPOINT", None)

import pytest

from src.model.types import Setting


@pytest.fixture
def chsh_settings():
    """(a, a', b, b') at (0, pi/2, pi/4, 3pi/4)."""
    return (
        Setting("a", 0.0),
        Setting("a'", math.pi / 2),
        Setting("b", math.pi / 4),
        Setting("b'", 3 * math.pi / 4),
    )
