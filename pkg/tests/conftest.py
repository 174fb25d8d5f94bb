import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rgfi.kernels import warmup  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    # compile the numba kernel once so timing-sensitive tests see steady state
    warmup()
