"""Pytest configuration and fixtures."""
import json

import pytest

from toric_legendrian import create_app
from toric_legendrian.cone import orthant_cone, ypq_cone
from toric_legendrian.delzant import build


@pytest.fixture
def app():
    """Create application instance for testing."""
    return create_app('testing')


@pytest.fixture
def runner(app):
    """Create test CLI runner."""
    return app.test_cli_runner()


@pytest.fixture
def y21():
    return ypq_cone(2, 1)


@pytest.fixture
def y21_data(y21):
    return build(y21)


@pytest.fixture
def orthant3():
    return orthant_cone(3)


@pytest.fixture
def cone_file(tmp_path):
    """Write a cone document to a temporary JSON file and return its path."""
    def write(document, name='cone.json'):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return str(path)
    return write
