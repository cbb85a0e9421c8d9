"""Switching-lemma laboratory.

Constructive objects (decision trees, canonical and common trees, grid
Tseitin restrictions, closures, the sampling game) plus a Monte Carlo
harness that compares measured failure rates against the closed-form
bounds.
"""

__version__ = "0.1.0"
