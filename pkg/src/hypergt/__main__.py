import sys

from hypergt.harness.cli import main

sys.exit(main())
