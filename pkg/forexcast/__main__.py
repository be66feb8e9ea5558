import sys

from forexcast.main import main

sys.exit(main())
