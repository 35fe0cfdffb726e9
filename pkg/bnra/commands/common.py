"""
Shared helpers for commands: loading inputs and emitting results
"""
from pathlib import Path
from typing import Any, Dict, Optional

import click

from bnra.core.protocol import Protocol
from bnra.format.codec import dumps
from bnra.format.dsl import parse_protocol
from bnra.models import CommandResult, Verdict

# Click path type for existing input files
INPUT = click.Path(exists=True, dir_okay=False, path_type=Path)
OUTPUT = click.Path(dir_okay=False, writable=True, path_type=Path)


def read_text(path: Path) -> str:
    """Read UTF-8 text, accepting CRLF line endings"""
    return path.read_text(encoding="utf-8")


def load_protocol(path: Path) -> Protocol:
    """Parse and validate a protocol file"""
    return parse_protocol(read_text(path))


def write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    summary(f"wrote {path}")


def summary(message: str) -> None:
    """Human-readable line on stderr"""
    click.echo(message, err=True)


def emit(
    verdict: Verdict,
    witness: Optional[Any] = None,
    stats: Optional[Dict[str, Any]] = None
) -> None:
    """Write the single JSON result object to stdout"""
    click.echo(dumps(CommandResult(verdict=verdict, witness=witness, stats=stats or {})), nl=False)


def as_json(document) -> Any:
    """A pydantic document as a plain JSON-compatible value"""
    return document.model_dump(mode="json", by_alias=True)
