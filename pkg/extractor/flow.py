#!/usr/bin/env python3
"""Export dense optical flow: flow.py --frames DIR --out DIR"""

import sys

from veilkit_extractor.cli import flow_main

if __name__ == "__main__":
    sys.exit(flow_main())
