#!/usr/bin/env python3
"""
Startup script for the semgraft pipeline.

Runs the command line from a source checkout without installing:
    python start_pipeline.py toy --output-dir toy
    python start_pipeline.py pipeline --config toy/toy.cfg
"""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from semgraft.cli.main import main

if __name__ == "__main__":
    main()
