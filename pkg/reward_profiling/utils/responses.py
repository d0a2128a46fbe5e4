import click
from flask import json

from reward_profiling.utils.errors import DomainError, ResultsIOError


def error_status(error):
    """Exit status for a failed command: 2 for bad input, 3 for file problems, 1 otherwise."""
    if isinstance(error, DomainError):
        return 2
    if isinstance(error, ResultsIOError):
        return 3
    return 1


def error_response(message, status_code=1):
    exc = click.ClickException(message)
    exc.exit_code = status_code
    return exc


def success_response(data, status_code=0):
    data["success"] = True
    click.echo(json.dumps(data, indent=2, sort_keys=True))
    return status_code
