import sys

from certopt.cli import main

sys.exit(main())
