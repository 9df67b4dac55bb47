import sys

from schbf.cli import main

sys.exit(main())
