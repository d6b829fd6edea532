import sys

from clockrc.cli import main

sys.exit(main())
