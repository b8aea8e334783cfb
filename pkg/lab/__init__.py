"""Lattice models, weighted translations and hypercyclicity checkers."""
