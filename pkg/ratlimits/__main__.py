import sys

from ratlimits.main import main

sys.exit(main())
