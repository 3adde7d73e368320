#!/usr/bin/env python3
"""Run the built-in digraph demo end to end and print the consolidated
report; equivalent to `nctopos demo --pretty`."""

import sys

from nctopos.cli import main

if __name__ == "__main__":
    sys.exit(main(["demo", "--pretty"] + sys.argv[1:]))
