import sys

from rcm.cli import main

sys.exit(main())
