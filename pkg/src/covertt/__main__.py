import sys

from covertt.cli import main

sys.exit(main())
