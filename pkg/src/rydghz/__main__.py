import sys

from rydghz.cli import main

sys.exit(main())
