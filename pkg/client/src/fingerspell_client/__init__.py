"""Webcam typing client and dataset extractor for the fingerspell server.

The client never classifies anything itself: every displayed prediction
comes back from the server over the wire protocol. The extractor turns
labeled image folders into the landmark CSV the trainer consumes.
"""

__version__ = "0.1.0"
