"""Algebraic data types: signatures, terms, finite algebras, bottomed semantics and polymorphism."""
from .errors import AdtError
from .sig import Signature, parse_signature, format_signature
from .terms import Bottom, Node, Variable, parse, flatten, show, enumerate_terms, catamorphism

__all__ = [
    "AdtError", "Signature", "parse_signature", "format_signature",
    "Bottom", "Node", "Variable", "parse", "flatten", "show", "enumerate_terms", "catamorphism",
]
