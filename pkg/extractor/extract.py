#!/usr/bin/env python3
"""Export per-frame ViT key grids: extract.py --frames DIR --out DIR --patch 8 --stride 8"""

import sys

from veilkit_extractor.cli import keys_main

if __name__ == "__main__":
    sys.exit(keys_main())
