"""Coherence Witness - Terminal Mode

Runs one of the coherence-verification commands (paradox, game, tomo, dicke, ghz,
visibility, report) from a source checkout without installing the package.
"""
import sys

from coherence.cli import main

if __name__ == "__main__":
    sys.exit(main())
