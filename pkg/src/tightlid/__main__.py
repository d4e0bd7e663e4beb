import sys

from tightlid.cli import main

sys.exit(main())
