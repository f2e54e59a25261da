"""Application configuration."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from dotenv import dotenv_values

BASE_DIR = Path(__file__).resolve().parent

# Settings live in a dotenv-format file; the process environment is never consulted.
CONFIG_FILE = BASE_DIR / "fourps.env"


def read_config_file(path: str | Path | None = None) -> dict[str, str]:
    """Return the raw key/value pairs of a dotenv-format settings file.

    A missing file yields an empty mapping so the built-in defaults apply.
    """
    path = Path(path) if path is not None else CONFIG_FILE
    if not path.is_file():
        return {}
    return {k: v for k, v in dotenv_values(path).items() if v is not None}


_settings = read_config_file()

# Algorithm (Step S parameters and loop budget)
EPSILON = Fraction(_settings.get("EPSILON", "1/10"))
DELTA = Fraction(_settings.get("DELTA", "1/100"))
MAX_ITERATIONS = int(_settings.get("MAX_ITERATIONS", "10000"))
# Short-word search run before the loop reports that it stalled
WITNESS_WORD_LENGTH = int(_settings.get("WITNESS_WORD_LENGTH", "6"))

# Approximate backend
TOLERANCE = float(_settings.get("TOLERANCE", "1e-12"))

# Oracle
ORACLE_WORD_LENGTH = int(_settings.get("ORACLE_WORD_LENGTH", "10"))
ORACLE_MAX_WORD_LENGTH = int(_settings.get("ORACLE_MAX_WORD_LENGTH", "12"))  # hard cap
JORGENSEN_WORD_LENGTH = int(_settings.get("JORGENSEN_WORD_LENGTH", "6"))
JORGENSEN_MAX_WORD_LENGTH = int(_settings.get("JORGENSEN_MAX_WORD_LENGTH", "8"))  # hard cap
ORACLE_KEEP_WORDS = int(_settings.get("ORACLE_KEEP_WORDS", "1000"))

# Batch mode
BATCH_WORKERS = int(_settings.get("BATCH_WORKERS", "4"))

# SVG output
SVG_WIDTH = int(_settings.get("SVG_WIDTH", "800"))
SVG_HEIGHT = int(_settings.get("SVG_HEIGHT", "400"))

# Logging
LOG_LEVEL = _settings.get("LOG_LEVEL", "WARNING").upper()
