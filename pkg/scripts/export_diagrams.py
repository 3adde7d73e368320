#!/usr/bin/env python3
"""Export DOT renderings of the demo site's sieve algebras, the classifier
Hasse diagrams (with D-classes as same-rank clusters), the demo presheaf, and
the top presheaf T; equivalent to `nctopos export-dot --dot DIR`."""

import sys

from nctopos.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "diagrams"
    sys.exit(main(["export-dot", "--dot", out, "--pretty"]))
