"""Lagrange basis machinery for matrix-valued polynomial coding.

A list of L equal-shape blocks defines the unique degree-(L-1) matrix
polynomial passing through them at the beta nodes. Workers get evaluations
at their alpha points; products of two such polynomials have degree 2L-2
and are recovered from any 2L-1 evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .field import FieldElement, PrimeField
from .matrix import DimensionError, FieldMatrix, OpCounter


class DegenerateNodesError(ValueError):
    """Interpolation nodes are not pairwise distinct."""


class InsufficientResultsError(ValueError):
    """Fewer evaluations supplied than the polynomial degree requires."""


@dataclass(frozen=True)
class EvalPoints:
    """The data nodes (betas, one per block) and machine nodes (alphas).

    All points are distinct and the two sets are disjoint, so no machine
    evaluation ever collides with a data node.
    """

    field: PrimeField
    betas: tuple[FieldElement, ...]
    alphas: tuple[FieldElement, ...]

    def __post_init__(self) -> None:
        beta_vals = [b.value for b in self.betas]
        alpha_vals = [a.value for a in self.alphas]
        if len(set(beta_vals)) != len(beta_vals):
            raise DegenerateNodesError("duplicate beta points")
        if len(set(alpha_vals)) != len(alpha_vals):
            raise DegenerateNodesError("duplicate alpha points")
        if set(beta_vals) & set(alpha_vals):
            raise DegenerateNodesError("beta and alpha point sets must be disjoint")
        if len(beta_vals) + len(alpha_vals) > self.field.modulus:
            raise ValueError(
                f"field of size {self.field.modulus} too small for "
                f"{len(beta_vals)} + {len(alpha_vals)} distinct points"
            )

    @classmethod
    def default(cls, field: PrimeField, blocks: int, machines: int) -> "EvalPoints":
        """betas = 0..L-1, alphas = L..L+N-1; needs p >= L+N."""
        betas = tuple(field.element(i) for i in range(blocks))
        alphas = tuple(field.element(blocks + i) for i in range(machines))
        return cls(field, betas, alphas)

    def alpha_for(self, machine: int) -> FieldElement:
        """Evaluation point of a 1-based machine id."""
        return self.alphas[machine - 1]


@dataclass(frozen=True)
class LagrangeCoeffs:
    """Basis weights for one target point over a fixed node set."""

    weights: tuple[FieldElement, ...]


def basis_at(nodes: Sequence[FieldElement], target: FieldElement) -> LagrangeCoeffs:
    """Weights w_i = prod_{j != i} (target - x_j) / (x_i - x_j).

    At target == nodes[i] the weights reduce to the indicator of i.
    """
    values = [n.value for n in nodes]
    if len(set(values)) != len(values):
        raise DegenerateNodesError(f"duplicate nodes: {values}")
    if not nodes:
        raise DegenerateNodesError("empty node set")
    p = target.field.modulus
    t = target.value
    weights = []
    for i, xi in enumerate(values):
        num = 1
        den = 1
        for j, xj in enumerate(values):
            if j == i:
                continue
            num = num * (t - xj) % p
            den = den * (xi - xj) % p
        weights.append(target.field.element(num * pow(den, p - 2, p)))
    return LagrangeCoeffs(tuple(weights))


def encode_blocks(
    blocks: Sequence[FieldMatrix],
    points: EvalPoints,
    at: FieldElement,
    counter: OpCounter | None = None,
) -> FieldMatrix:
    """Evaluate the block polynomial at a point: sum_l blocks[l] * basis_l(at).

    Evaluating at betas[l] returns blocks[l] exactly. Counts L MACs per
    output entry.
    """
    if len(blocks) != len(points.betas):
        raise DimensionError(
            f"{len(blocks)} blocks but {len(points.betas)} beta points"
        )
    first = blocks[0]
    if any((b.rows, b.cols) != (first.rows, first.cols) for b in blocks):
        raise DimensionError("blocks must share one shape")
    weights = basis_at(points.betas, at).weights
    return _combine(blocks, weights, first.field, counter)


def interpolate_eval(
    results: Sequence[tuple[FieldElement, FieldMatrix]],
    target: FieldElement,
    counter: OpCounter | None = None,
) -> FieldMatrix:
    """Evaluate at `target` the unique polynomial through the given points.

    `results` are (node, value) pairs with distinct nodes; the caller must
    supply at least degree+1 of them (2L-1 for a product of two degree-(L-1)
    polynomials). Any consistent superset yields the same value. Counts
    len(results) MACs per entry.
    """
    if not results:
        raise InsufficientResultsError("no evaluations supplied")
    nodes = [node for node, _ in results]
    values = [value for _, value in results]
    first = values[0]
    if any((v.rows, v.cols) != (first.rows, first.cols) for v in values):
        raise DimensionError("evaluation values must share one shape")
    weights = basis_at(nodes, target).weights
    return _combine(values, weights, first.field, counter)


def _combine(
    mats: Sequence[FieldMatrix],
    weights: Sequence[FieldElement],
    field: PrimeField,
    counter: OpCounter | None,
) -> FieldMatrix:
    p = field.modulus
    acc = [0] * mats[0].size
    for w, m in zip(weights, mats):
        wv = w.value
        data = m.data
        acc = [a + wv * x for a, x in zip(acc, data)]
    if counter is not None:
        counter.tick(len(mats) * mats[0].size)
    return FieldMatrix(field, mats[0].rows, mats[0].cols, (a % p for a in acc))
