"""``python -m tfmult``."""

import sys

from tfmult.xlab.cli import main

sys.exit(main())
