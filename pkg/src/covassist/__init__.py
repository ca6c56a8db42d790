"""covassist: an emergency-information chatbot engine.

Answers disease-status queries from a lightweight ontology, drives
conversations with a verified finite-state machine, extracts intent with
RAKE keyword scoring, and falls back to a retrieval-based responder.
"""

__version__ = "0.1.0"
