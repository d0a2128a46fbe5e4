import json
import os

import pytest

from reward_profiling import create_app
from reward_profiling.mdp.chain import ChainMdp
from reward_profiling.policy.families import default_family

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), 'fixtures')


@pytest.fixture()
def app(tmp_path):
    app = create_app({
        'TESTING': True,
        'PROFILING_OUTPUT_DIR': str(tmp_path / 'results'),
        'PROFILING_WORKERS': 1,
        'PROFILING_RECORD_WALL_TIME': False,
        'PROFILING_LOG_LEVEL': 'ERROR',
    })
    yield app


@pytest.fixture()
def runner(app):
    return app.test_cli_runner()


@pytest.fixture()
def chain_env():
    return ChainMdp(horizon=20)


@pytest.fixture()
def chain_family(chain_env):
    return default_family(chain_env.spec)


@pytest.fixture()
def fixture_path():
    def _path(name):
        return os.path.join(FIXTURES_DIR, name)
    return _path


def parse_json_output(output):
    """The JSON document a command prints after any log lines."""
    start = output.index('{')
    return json.loads(output[start:])
