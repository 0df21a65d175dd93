"""Entry point for ``python -m markov_ldp``."""

import sys

from markov_ldp.cli import main

if __name__ == "__main__":
    sys.exit(main())
