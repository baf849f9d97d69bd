import sys

from fairpool.cli import main

sys.exit(main())
