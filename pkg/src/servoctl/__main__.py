import sys

from servoctl.cli import main

sys.exit(main())
