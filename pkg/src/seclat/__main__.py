import sys

from seclat.cli import main

sys.exit(main())
