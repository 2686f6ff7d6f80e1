import sys

from sivending.cli import main

sys.exit(main())
