import sys

from patrolsched.cli import main

sys.exit(main())
