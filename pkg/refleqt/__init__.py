"""
refleqt
=======
A proof-theory workbench: Goedel coding of syntax, a checkable Hilbert-style
calculus over decidable theory presentations, consistency/reflection/truth
schema generators, relative interpretations, executable reductions between
presentations, and reflection progressions with an implicit-commitment engine.
"""

__version__ = "0.1.0"
