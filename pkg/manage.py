#!/usr/bin/env python
"""Command-line entry point for the extract, qualify, fit and diagnose pipeline."""
from __future__ import annotations

import os
import sys
from collections.abc import Sequence


def main(argv: Sequence[str] | None = None) -> None:
    """Run a pipeline command; ``argv`` defaults to ``sys.argv``.

    Also installed as the ``rtmodel`` console script.
    """
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "rtmodel.settings")
    from django.core.management import (  # pylint: disable=import-outside-toplevel
        execute_from_command_line,
    )

    execute_from_command_line(list(sys.argv if argv is None else argv))


if __name__ == "__main__":
    main()
