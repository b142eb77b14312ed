"""Coded elastic matrix multiplication over prime fields.

Straggler-tolerant distributed products A @ B(t) where both the stored
matrix and the per-step download are Lagrange coded, with computation
assignments for homogeneous and heterogeneous machine speeds, storage
placement that survives machine preemption, storage-sharing trade-off
curves, a closed-form cost model, and a Monte-Carlo timing simulator.
"""

from .assignment import Assignment, cyclic, heterogeneous, loads, validate, water_filling_loads
from .cost import CostReport, check_measured, table_row
from .field import FieldElement, PrimeField
from .lagrange import EvalPoints, basis_at, encode_blocks, interpolate_eval
from .matrix import BlockPartition, FieldMatrix, concat, matmul, scale_add, split
from .scheme import SystemParams, lcc_baseline, run_scheme

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BlockPartition",
    "CostReport",
    "EvalPoints",
    "FieldElement",
    "FieldMatrix",
    "PrimeField",
    "SystemParams",
    "basis_at",
    "check_measured",
    "concat",
    "cyclic",
    "encode_blocks",
    "heterogeneous",
    "interpolate_eval",
    "lcc_baseline",
    "loads",
    "matmul",
    "run_scheme",
    "scale_add",
    "split",
    "table_row",
    "validate",
    "water_filling_loads",
]
