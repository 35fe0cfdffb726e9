"""
Global error handling for commands
"""
import functools
import json
import traceback
from typing import Any, Callable, Dict

import click
from pydantic import ValidationError

from bnra.config import settings
from bnra.exceptions import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, BnraException
from bnra.middleware.logging import invocation_logging


def _emit(payload: Dict[str, Any]) -> None:
    click.echo(json.dumps(payload, sort_keys=True, indent=2, default=str), err=True)


def handle_errors(func: Callable[..., int]) -> Callable[..., None]:
    """
    Run a command body and turn its outcome into an exit code

    The body returns an exit code. Toolkit exceptions become a JSON error
    object on stderr with their own exit code.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> None:
        ctx = click.get_current_context()
        command = ctx.command_path
        try:
            with invocation_logging(command):
                code = func(*args, **kwargs)
        except click.ClickException:
            raise
        except BnraException as exc:
            # Handle custom toolkit exceptions
            _emit({
                "error": exc.message,
                "type": exc.__class__.__name__,
                "details": exc.details,
                "command": command
            })
            code = exc.exit_code
        except ValidationError as exc:
            # Handle Pydantic validation errors
            errors = []
            for error in exc.errors():
                errors.append({
                    "field": ".".join(str(loc) for loc in error["loc"]),
                    "message": error["msg"],
                    "type": error["type"]
                })
            _emit({
                "error": "Validation error",
                "type": "ValidationError",
                "details": {"errors": errors},
                "command": command
            })
            code = EXIT_USAGE
        except Exception as exc:
            # Handle unexpected errors
            error_detail = str(exc) if settings.debug else "An unexpected error occurred"
            if settings.debug:
                traceback.print_exc()
            _emit({
                "error": error_detail,
                "type": "InternalError",
                "details": {},
                "command": command
            })
            code = EXIT_INTERNAL
        ctx.exit(code if code is not None else EXIT_OK)

    return wrapper
