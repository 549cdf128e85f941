#!/usr/bin/env python
"""Command-line utility for the dimension tools."""
import sys


def main():
    """Run a dimension command."""
    try:
        from PressureDim.cli import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import PressureDim. Are numpy, scipy and pandas installed "
            "and is the project root on your PYTHONPATH?"
        ) from exc
    return run(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
