"""Independent/dependent decomposition of R^n with respect to a discrete xi.

The independent subspaces are the nonzero sign-pattern intersections
E_1^{a_1} ∩ ... ∩ E_k^{a_k} (each a_i choosing E_i or its complement); the
dependent subspace is the orthogonal complement of their sum.
"""

from dataclasses import dataclass
from itertools import product
from typing import List

import numpy as np

from .. import config
from ..core.error_handler import BudgetExceededError
from ..core.logger import get_logger
from .distribution import SubspaceDistribution
from .subspace import Subspace, complement, intersect, sorted_subspaces, span_of

logger = get_logger(__name__)


@dataclass(frozen=True)
class IndependentDecomposition:
    independent: tuple
    dependent: Subspace
    ambient_dim: int

    @property
    def blocks(self) -> List[Subspace]:
        """Independent subspaces followed by the dependent one when nonzero."""
        blocks = list(self.independent)
        if self.dependent.dim > 0:
            blocks.append(self.dependent)
        return blocks

    @property
    def is_trivial(self) -> bool:
        """True when nothing is independent (E_dep = R^n)."""
        return not self.independent

    def summary(self) -> str:
        dims = [S.dim for S in self.independent]
        if dims and len(set(dims)) == 1:
            head = f"{len(dims)} independent subspaces of dim {dims[0]}"
        else:
            head = f"{len(dims)} independent subspaces" + (f" (dims {dims})" if dims else "")
        return f"{head}, dim(E_dep)={self.dependent.dim}"

    def to_dict(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "independent": [S.to_dict() for S in self.independent],
            "dependent": self.dependent.to_dict(),
        }


def _assemble(parts: List[Subspace], n: int, tol: float) -> IndependentDecomposition:
    parts = sorted_subspaces(parts)
    dependent = complement(span_of(parts, n, tol))
    return IndependentDecomposition(tuple(parts), dependent, n)


def independent_decomposition(xi: SubspaceDistribution) -> IndependentDecomposition:
    """Refine {R^n} atom by atom: W -> nonzero members of {W ∩ E, W ∩ E^perp}.

    Partial-pattern intersections are mutually orthogonal, so at most n
    pieces survive each stage.
    """
    xi.require_discrete("independent_decomposition")
    n = xi.ambient_dim
    tol = max(S.tol for S in xi.atoms)
    parts = [Subspace.full(n, tol)]
    for i, atom in enumerate(xi.atoms):
        atom_perp = complement(atom)
        refined = []
        for W in parts:
            for piece in (intersect(W, atom), intersect(W, atom_perp)):
                if piece.dim > 0:
                    refined.append(piece)
        lost = sum(W.dim for W in parts) - sum(W.dim for W in refined)
        if lost:
            logger.debug("refinement_lost_dimensions", atom=i, lost=lost)
        parts = refined
        if not parts:
            break
    result = _assemble(parts, n, tol)
    logger.info(
        "decomposition_done",
        n=n,
        atoms=xi.size,
        independent=[S.dim for S in result.independent],
        dependent_dim=result.dependent.dim,
    )
    return result


def brute_force_decomposition(xi: SubspaceDistribution) -> IndependentDecomposition:
    """All 2^k sign-pattern intersections, keeping the nonzero ones."""
    xi.require_discrete("brute_force_decomposition")
    k = xi.size
    if k > config.BRUTE_FORCE_MAX_ATOMS:
        raise BudgetExceededError(2.0**k, 2.0**config.BRUTE_FORCE_MAX_ATOMS, "sign-pattern enumeration")
    n = xi.ambient_dim
    tol = max(S.tol for S in xi.atoms)
    choices = [(S, complement(S)) for S in xi.atoms]
    parts = []
    for pattern in product((0, 1), repeat=k):
        current = Subspace.full(n, tol)
        for (inside, outside), bit in zip(choices, pattern):
            current = intersect(current, outside if bit else inside)
            if current.dim == 0:
                break
        if current.dim > 0:
            parts.append(current)
    return _assemble(parts, n, tol)


def decompositions_equal(
    a: IndependentDecomposition, b: IndependentDecomposition, tol: float = 1e-8
) -> bool:
    """Equality of the independent sets (order-free) and of the dependent parts."""
    if a.ambient_dim != b.ambient_dim or len(a.independent) != len(b.independent):
        return False
    if not a.dependent.equals(b.dependent, tol):
        return False
    remaining = list(b.independent)
    for S in a.independent:
        match = next((j for j, T in enumerate(remaining) if S.equals(T, tol)), None)
        if match is None:
            return False
        remaining.pop(match)
    return True


def check_decomposition(
    decomposition: IndependentDecomposition, xi: SubspaceDistribution, tol: float = 1e-8
) -> List[str]:
    """Violated structural properties (empty when the decomposition is sound)."""
    problems = []
    blocks = decomposition.blocks
    total = sum(S.dim for S in decomposition.independent) + decomposition.dependent.dim
    if total != decomposition.ambient_dim:
        problems.append(f"dimensions sum to {total}, not {decomposition.ambient_dim}")
    for i, S in enumerate(blocks):
        for T in blocks[i + 1 :]:
            if np.linalg.norm(S.basis.T @ T.basis) > tol:
                problems.append("blocks are not mutually orthogonal")
    if not xi.continuous:
        for S in decomposition.independent:
            for atom in xi.atoms:
                prod_ = atom.projector @ S.projector
                if min(np.linalg.norm(prod_, 2), np.linalg.norm(prod_ - S.projector, 2)) > tol:
                    problems.append("an independent subspace is split by an atom")
    return problems
