"""Proof kernel, cyclic proof checker and bounded semantics for arithmetic
with finitely iterated inductive definitions."""

__version__ = "0.1.0"
