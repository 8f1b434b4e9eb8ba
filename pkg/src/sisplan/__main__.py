import sys

from sisplan.cli import main

sys.exit(main())
