import sys

from litclust.cli import main

sys.exit(main())
