"""Fingerspelling recognition toolkit.

Hand-landmark featurization, a from-scratch fully-connected classifier
trained with Adam, a confidence-bound typing state machine, and a
newline-delimited streaming protocol for live use.
"""

__version__ = "0.1.0"
