#!/usr/bin/env python3
"""
Time-bin switch simulator launcher

    python run_timebin.py hom-scan --ideal
    python run_timebin.py fringe-scan --david-phase pi/2 --pulses 1000000
    python run_timebin.py cz-check
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from timebin.cli import main

if __name__ == "__main__":
    sys.exit(main())
