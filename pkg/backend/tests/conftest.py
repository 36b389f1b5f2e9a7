import sys
from pathlib import Path

import numpy as np
import pytest

BACKEND_DIR = Path(__file__).resolve().parent.parent
if str(BACKEND_DIR) not in sys.path:
    sys.path.insert(0, str(BACKEND_DIR))


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


@pytest.fixture
def app(tmp_path):
    from app import create_app
    return create_app({'TESTING': True, 'CORPUS_DIR': tmp_path})


@pytest.fixture
def runner(app):
    return app.test_cli_runner()
