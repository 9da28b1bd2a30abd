#!/usr/bin/env python3
"""
Entry point for the dirac-wwm command line.

Usage:
    python src/main.py --help
    python src/main.py check problems/s1.json
"""

from dirac_wwm.cli import main

if __name__ == '__main__':
    main()
