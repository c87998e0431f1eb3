"""Exact solvers for cycle-hitting vertex-deletion problems.

Weighted SFVS, ECT, SOCT and SECT on nice tree decompositions; weighted
SFVS, Node Multiway Cut and OCT on clique-width expressions; a brute-force
oracle; and a SAT-to-OCT hardness instance generator.
"""

from .graph import INF, ComponentClass, Multigraph, Problem, Weight
from .oracle import OracleResult, brute_force, check_feasible

__all__ = [
    "INF",
    "ComponentClass",
    "Multigraph",
    "Problem",
    "Weight",
    "OracleResult",
    "brute_force",
    "check_feasible",
]

__version__ = "0.1.0"
