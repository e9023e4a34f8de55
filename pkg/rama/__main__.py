import sys

from rama.cli import main

sys.exit(main())
