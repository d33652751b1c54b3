"""Coherent-logic proving and proof illustration.

The pipeline: parse TPTP (``tptp``), search for a proof (``prover``),
render it as text (``proofdoc``), interpret it on the plane (``interp``)
and compile it to GCL and SVG (``illustrate``, ``gcl``).
"""

__version__ = "0.1.0"
