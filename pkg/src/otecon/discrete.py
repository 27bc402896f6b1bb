"""Exact solver for discrete optimal transport via the network simplex.

The linear program

    min  sum_ij C_ij pi_ij
    s.t. sum_j pi_ij = mu_i,  sum_i pi_ij = nu_j,  pi >= 0

is solved by maintaining a basic feasible solution whose basis edges form a
spanning tree of the bipartite supply/demand graph.  Dual potentials are
propagated along the tree, a violating edge enters the basis, mass shifts
around the unique cycle it creates, and the binding edge leaves.  With the
lexicographic entering and leaving rules used here the method never cycles,
so the iteration cap is a pure safety net.

The returned plan and potentials form an optimality certificate: dual
feasibility plus complementary slackness, checkable by
:func:`verify_optimality` without trusting the solver.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._util import frozen
from .errors import (
    DomainError,
    InfeasibleError,
    NonAssignmentError,
    SolverStallError,
)
from .measures import CostMatrix, DiscreteMeasure

# Dual violations below this threshold are treated as zero when searching
# for an entering edge; well under the 1e-9 certificate tolerance but well
# above accumulated rounding noise at the supported problem sizes.
PIVOT_TOL = 1e-11

CERT_TOL = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    """Coupling matrix together with the spanning-tree basis that produced it.

    ``basis_edges`` has exactly M + N - 1 edges forming a spanning tree of
    the bipartite graph on rows and columns; the support of ``mass`` is
    contained in the basis (zero-mass basic edges are kept for degeneracy).
    """

    mass: np.ndarray
    basis_edges: frozenset = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.mass, dtype=float)
        if m.ndim != 2:
            raise DomainError(f"mass must be a matrix, got shape {m.shape}")
        if np.any(m < -CERT_TOL):
            raise DomainError("mass entries must be nonnegative")
        rows, cols = m.shape
        edges = frozenset((int(i), int(j)) for i, j in self.basis_edges)
        if len(edges) != rows + cols - 1:
            raise DomainError(
                f"basis must have {rows + cols - 1} edges, got {len(edges)}"
            )
        if not _is_spanning_tree(edges, rows, cols):
            raise DomainError("basis edges must form a spanning tree")
        support = {(int(i), int(j)) for i, j in zip(*np.nonzero(m > CERT_TOL))}
        if not support <= edges:
            raise DomainError("plan support must be contained in the basis")
        object.__setattr__(self, "mass", frozen(m))
        object.__setattr__(self, "basis_edges", edges)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mass.shape

    def marginal_residual(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        """Largest violation of the adding-up constraints against mu, nu."""
        row = np.max(np.abs(self.mass.sum(axis=1) - mu.weights))
        col = np.max(np.abs(self.mass.sum(axis=0) - nu.weights))
        return float(max(row, col))


@dataclass(frozen=True)
class DualPotentials:
    """Row and column potentials, normalized so phi[0] == 0."""

    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", frozen(np.asarray(self.phi, dtype=float)))
        object.__setattr__(self, "psi", frozen(np.asarray(self.psi, dtype=float)))

    def objective(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        return float(mu.weights @ self.phi + nu.weights @ self.psi)


def _is_spanning_tree(edges, rows: int, cols: int) -> bool:
    """Check the bipartite edge set is acyclic and connected."""
    n_nodes = rows + cols
    parent = list(range(n_nodes))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    merged = 0
    for i, j in edges:
        if not (0 <= i < rows and 0 <= j < cols):
            return False
        ra, rb = find(i), find(rows + j)
        if ra == rb:
            return False
        parent[ra] = rb
        merged += 1
    return merged == n_nodes - 1


def _check_balanced(mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    gap = abs(mu.total_mass - nu.total_mass)
    if gap > 1e-10 * max(1.0, mu.total_mass):
        raise InfeasibleError(
            f"total masses differ by {gap!r}; transport is infeasible"
        )


def northwest_corner(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportPlan:
    """North-west corner starting plan with exactly M + N - 1 basis edges.

    Walks the matrix from the top-left cell, each step exhausting the current
    row or column capacity.  When both vanish at once only the row advances
    (the column instead on the last row), so the visited cells always form a
    spanning tree even on degenerate inputs; the extra cells carry zero mass.
    """
    _check_balanced(mu, nu)
    m_rows, n_cols = mu.size, nu.size
    mass = np.zeros((m_rows, n_cols))
    edges = []
    i = j = 0
    r = float(mu.weights[0])
    c = float(nu.weights[0])
    while i < m_rows and j < n_cols:
        step = min(r, c)
        mass[i, j] = step
        edges.append((i, j))
        r -= step
        c -= step
        # Advance the exhausted index, but never leave the last row while
        # columns remain (or vice versa): rounding dust in the running
        # capacities must not strand unvisited nodes outside the basis tree.
        if r <= 0.0:
            if i < m_rows - 1:
                i += 1
                r = float(mu.weights[i])
            else:
                j += 1
                c = float(nu.weights[j]) if j < n_cols else 0.0
        else:
            if j < n_cols - 1:
                j += 1
                c = float(nu.weights[j])
            else:
                i += 1
                r = float(mu.weights[i]) if i < m_rows else 0.0
    return TransportPlan(mass, frozenset(edges))


def _tree_adjacency(edges, rows: int, cols: int) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(rows + cols)]
    for i, j in edges:
        adj[i].append(rows + j)
        adj[rows + j].append(i)
    return adj


def _potentials_from_basis(
    edges: frozenset, cost: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate dual potentials over the basis tree from phi[0] = 0.

    Basis edges satisfy phi_i + psi_j = C_ij exactly by construction, which
    is complementary slackness for every edge that can carry mass.
    """
    rows, cols = cost.shape
    phi = np.zeros(rows)
    psi = np.zeros(cols)
    adj = _tree_adjacency(edges, rows, cols)
    seen = [False] * (rows + cols)
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nxt in adj[node]:
            if seen[nxt]:
                continue
            seen[nxt] = True
            if node < rows:
                psi[nxt - rows] = cost[node, nxt - rows] - phi[node]
            else:
                phi[nxt] = cost[nxt, node - rows] - psi[node - rows]
            queue.append(nxt)
    return phi, psi


def _tree_path(adj, start: int, goal: int) -> list[int]:
    """Unique node path between two tree nodes, by breadth-first search."""
    prev = {start: -1}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in adj[node]:
            if nxt not in prev:
                prev[nxt] = node
                queue.append(nxt)
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def solve_discrete_ot(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    cost: CostMatrix,
    max_iter: int | None = None,
) -> tuple[TransportPlan, DualPotentials, float]:
    """Solve the discrete transport LP exactly; return plan, duals, value.

    Pivoting uses the lexicographically smallest violating edge to enter and,
    among the minimum-mass reverse edges on the induced cycle, the
    lexicographically smallest to leave.  Both rules are deterministic and
    together rule out cycling.  Zero-mass basic edges are retained so the
    basis stays a spanning tree under degeneracy.
    """
    c = cost.entries
    if c.shape != (mu.size, nu.size):
        raise DomainError(
            f"cost shape {c.shape} does not match measures ({mu.size}, {nu.size})"
        )
    plan = northwest_corner(mu, nu)
    mass = np.array(plan.mass)
    edges = set(plan.basis_edges)
    rows, cols = c.shape
    if max_iter is None:
        max_iter = 200 * rows * cols + 1000

    for _ in range(max_iter):
        phi, psi = _potentials_from_basis(frozenset(edges), c)
        slack = c - phi[:, None] - psi[None, :]
        violating = np.argwhere(slack < -PIVOT_TOL)
        if violating.size == 0:
            plan = TransportPlan(mass, frozenset(edges))
            pots = DualPotentials(phi, psi)
            value = float(np.sum(mass * c))
            return plan, pots, value
        # np.argwhere scans row-major, so the first hit is the
        # lexicographically smallest violating edge.
        enter = (int(violating[0, 0]), int(violating[0, 1]))

        adj = _tree_adjacency(edges, rows, cols)
        node_path = _tree_path(adj, rows + enter[1], enter[0])
        cycle = [enter]
        for a, b in zip(node_path[:-1], node_path[1:]):
            if a < rows:
                cycle.append((a, b - rows))
            else:
                cycle.append((b, a - rows))
        reverse = cycle[1::2]
        theta = min(mass[e] for e in reverse)
        leave = min(e for e in reverse if mass[e] <= theta)
        for k, e in enumerate(cycle):
            mass[e] += theta if k % 2 == 0 else -theta
        mass[leave] = 0.0
        edges.remove(leave)
        edges.add(enter)
    raise SolverStallError(f"no optimum after {max_iter} pivots")


def verify_optimality(
    plan: TransportPlan,
    potentials: DualPotentials,
    cost: CostMatrix,
    tol: float = CERT_TOL,
) -> bool:
    """Certificate check: dual feasibility plus complementary slackness.

    Independent of how plan and potentials were computed; a True result
    proves optimality of the plan for the given cost up to tol.
    """
    c = cost.entries
    if plan.shape != c.shape:
        raise DomainError(
            f"plan shape {plan.shape} does not match cost shape {c.shape}"
        )
    phi, psi = potentials.phi, potentials.psi
    if phi.size != c.shape[0] or psi.size != c.shape[1]:
        raise DomainError("potential lengths do not match cost shape")
    slack = c - phi[:, None] - psi[None, :]
    if np.min(slack) < -tol:
        return False
    binding = np.abs(slack) <= tol
    return bool(np.all(binding[plan.mass > 1e-12]))


def extract_assignment(plan: TransportPlan) -> np.ndarray:
    """Read a permutation off a plan between uniform n-point measures.

    Requires a square plan with exactly one positive entry per row and per
    column, each equal to 1/n within 1e-9.  Returns sigma with
    sigma[i] = column assigned to row i (0-based).
    """
    rows, cols = plan.shape
    if rows != cols:
        raise NonAssignmentError(f"plan is {rows} x {cols}, not square")
    positive = plan.mass > 1e-9
    if np.any(positive.sum(axis=1) != 1) or np.any(positive.sum(axis=0) != 1):
        raise NonAssignmentError("plan mass is split; no unique assignment")
    sigma = np.argmax(positive, axis=1)
    if np.max(np.abs(plan.mass[np.arange(rows), sigma] - 1.0 / rows)) > 1e-9:
        raise NonAssignmentError("positive entries differ from 1/n")
    return sigma
