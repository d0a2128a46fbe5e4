import os

from dotenv import load_dotenv
from flask import Flask
from flask.cli import FlaskGroup

__version__ = "0.1.0"

# Load environment variables
dotenv_path = os.path.join(os.path.dirname(__file__), '..', '.env')
load_dotenv(dotenv_path)

# commands/blueprints
from .commands.experiments_commands import experiments_bp  # noqa: E402
from .commands.verify_commands import verify_bp  # noqa: E402


def create_app(test_config=None):
    app = Flask(__name__)
    # Configuration settings
    app.config['PROFILING_OUTPUT_DIR'] = os.getenv('PROFILING_OUTPUT_DIR', 'results')
    app.config['PROFILING_WORKERS'] = int(os.getenv('PROFILING_WORKERS', '1'))
    app.config['PROFILING_RECORD_WALL_TIME'] = os.getenv('PROFILING_RECORD_WALL_TIME', 'false').lower() in (
        '1', 'true', 'yes')
    app.config['PROFILING_LOG_LEVEL'] = os.getenv('PROFILING_LOG_LEVEL', 'INFO').upper()
    if test_config is not None:
        app.config.update(test_config)

    # app.logger is the "reward_profiling" logger, so library modules log through its handler
    app.logger.setLevel(app.config['PROFILING_LOG_LEVEL'])

    # Register blueprints
    app.register_blueprint(experiments_bp)
    app.register_blueprint(verify_bp)

    return app


cli = FlaskGroup(create_app=create_app, add_default_commands=False, load_dotenv=False,
                 help="Reward-profiled policy-gradient experiments.")
