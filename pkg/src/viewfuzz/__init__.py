"""Metamorphic GUI fuzzing for non-crashing functional bugs.

Seeds random GUI tests against a scripted app, grows mutants by inserting
independent event loops at pivot layouts, and reports mutants whose GUI
effects stop containing the seed's effects.
"""

__version__ = "1.0.0"
