import sys

from aakit.cli import main

sys.exit(main())
