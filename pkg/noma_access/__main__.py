import sys

from noma_access.harness.cli import main

sys.exit(main())
