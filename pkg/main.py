# Main entry point for the Homodyne Super-Resolution Simulator

import os
import sys

# Add project root to path so `python main.py` works from anywhere
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from implementation.cli import main

if __name__ == "__main__":
    sys.exit(main())
