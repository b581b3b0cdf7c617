import sys

from bpire.cli.main import main

if __name__ == '__main__':
    sys.exit(main())
