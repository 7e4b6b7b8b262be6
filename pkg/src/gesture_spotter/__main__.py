import sys

from gesture_spotter.cli import main

sys.exit(main())
