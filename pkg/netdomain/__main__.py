import sys

from netdomain.cli import main

sys.exit(main())
