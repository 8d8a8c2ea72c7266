from magmacheck.cli import main
import sys

sys.exit(main())
