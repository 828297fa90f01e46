#!/usr/bin/env python3
"""
minipol launcher
Run this script to use the minipol command line without installing it.
"""

if __name__ == "__main__":
    import sys

    from minipol.cli import main
    sys.exit(main())
