import sys

from ksverify.cli import main

sys.exit(main())
