#!/usr/bin/env python3
"""Client that always fails with a nonzero exit code."""
import sys

sys.stdin.read()
print("synthetic failure: model unavailable", file=sys.stderr)
sys.exit(9)
