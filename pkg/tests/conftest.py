import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from gaussprg.config import get_settings  # noqa: E402
from gaussprg.services.logging import run_log_store  # noqa: E402


@pytest.fixture(autouse=True)
def _reset_state():
    run_log_store.clear()
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
