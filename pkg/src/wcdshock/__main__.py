import sys

from wcdshock.cli import main

sys.exit(main())
