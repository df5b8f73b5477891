"""Self-adjusting B-trees in a unit-cost B-tree model, and the machinery around them.

Modules: ``model`` (the B-tree cost model), ``classic`` (classic B-trees),
``reference`` (reference tree and interleave bound), ``belga`` (Belga
B-trees), ``rb_sim`` (red-black simulation of the model), ``static_map``
(static BST to B-tree mappings) and ``harness`` (workloads and runs).
"""
from ._backend import NAME as BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
