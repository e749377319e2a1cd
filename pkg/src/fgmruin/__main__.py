"""Allow running the CLI as ``python -m fgmruin``."""

from .cli import entry

if __name__ == "__main__":
    entry()
