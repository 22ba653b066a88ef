"""Exact-arithmetic computer algebra for symmetric operads and cooperads
in chain complexes: free operads on trees, cobar constructions, twisting
cochains, quasi-free algebra replacements, homotopy-coherent structures
on cofree coalgebras, and operad cylinders — with machine-checkable
certificates (d^2 = 0, twisting equations, acyclicity) over Z, Q, and
prime fields."""

__version__ = "0.1.0"
