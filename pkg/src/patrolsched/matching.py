"""Periodic (1+eps)-quasi-regular schedules by slot/visit matching.

M slots sit at t/M on the unit circle.  Target i owns A_i = M*alpha_i visit
tokens at (theta_i + j/A_i) mod 1 for a random offset theta_i.  A slot and
a token are adjacent when their circle distance is at most
delta = sqrt(n ln M / 2) / M, and a perfect matching assigns each slot a
target.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from math import floor, lcm, log, sqrt
from typing import Sequence

import numpy as np

from patrolsched.core import PeriodicSequence, frequency_vector
from patrolsched.rng import make_rng, random_dyadic

DEFAULT_RETRIES = 16
THETA_BITS = 64


class MatchingFailedError(RuntimeError):
    def __init__(self, attempts: int):
        super().__init__(f"no perfect matching after {attempts} attempts")
        self.attempts = attempts


def circle_distance(x: Fraction, y: Fraction) -> Fraction:
    d = abs(x - y) % 1
    return min(d, 1 - d)


@dataclass(frozen=True)
class SlotInstance:
    values: tuple[Fraction, ...]
    M: int
    A: tuple[int, ...]
    thetas: tuple[Fraction, ...]
    delta: float
    # exact radius when overridden; otherwise delta is the irrational default
    delta_exact: Fraction | None = None
    _bracket_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.values)

    def positions(self) -> list[tuple[int, int, Fraction]]:
        """All tokens (i, j, Pos(i, j))."""
        return [
            (i, j, (self.thetas[i] + Fraction(j, a)) % 1)
            for i, a in enumerate(self.A)
            for j in range(a)
        ]

    def _delta_sq_bracket(self, digits: int) -> tuple[Fraction, Fraction]:
        if digits not in self._bracket_cache:
            with localcontext() as ctx:
                ctx.prec = digits
                ln_m = Decimal(self.M).ln()
            ln_lo = Fraction(ln_m) * (1 - Fraction(1, 10 ** (digits - 2)))
            ln_hi = Fraction(ln_m) * (1 + Fraction(1, 10 ** (digits - 2)))
            scale = Fraction(self.n, 2 * self.M * self.M)
            self._bracket_cache[digits] = (scale * ln_lo, scale * ln_hi)
        return self._bracket_cache[digits]

    def within_delta(self, d: Fraction) -> bool:
        """d <= delta, decided exactly (delta^2 bracketed by rationals)."""
        if self.delta_exact is not None:
            return d <= self.delta_exact
        d2 = d * d
        digits = 40
        while True:
            lo, hi = self._delta_sq_bracket(digits)
            if d2 < lo:
                return True
            if d2 > hi:
                return False
            digits *= 2


def default_delta(n: int, M: int) -> float:
    return sqrt(n * log(M) / 2) / M


def build_instance(values, rng: np.random.Generator, delta: Fraction | None = None) -> SlotInstance:
    """Draw offsets and set up slots/tokens; ``delta`` overrides the radius."""
    vals = frequency_vector(values)
    M = lcm(*(v.denominator for v in vals))
    A = tuple(int(v * M) for v in vals)
    thetas = tuple(random_dyadic(rng, THETA_BITS) for _ in vals)
    if delta is None:
        return SlotInstance(vals, M, A, thetas, default_delta(len(vals), M))
    delta = Fraction(delta)
    return SlotInstance(vals, M, A, thetas, float(delta), delta)


@dataclass(frozen=True)
class SlotGraph:
    instance: SlotInstance
    tokens: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]  # slot -> token ids

    def token_degrees(self) -> list[int]:
        deg = [0] * len(self.tokens)
        for nbrs in self.adjacency:
            for k in nbrs:
                deg[k] += 1
        return deg


def build_graph(inst: SlotInstance) -> SlotGraph:
    M = inst.M
    tokens = []
    adjacency: list[list[int]] = [[] for _ in range(M)]
    reach = inst.delta * M
    for tid, (i, j, pos) in enumerate(inst.positions()):
        tokens.append((i, j))
        if 2 * reach + 2 >= M:
            candidates = range(M)
        else:
            centre = float(pos) * M
            candidates = {s % M for s in range(floor(centre - reach) - 1, floor(centre + reach) + 2)}
        for slot in sorted(candidates):
            if inst.within_delta(circle_distance(pos, Fraction(slot, M))):
                adjacency[slot].append(tid)
    return SlotGraph(inst, tuple(tokens), tuple(tuple(a) for a in adjacency))


def hopcroft_karp(adjacency: Sequence[Sequence[int]], n_right: int) -> list[int]:
    """Maximum bipartite matching; returns the right partner of each left vertex or -1."""
    n_left = len(adjacency)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    inf = n_left + n_right + 1
    while True:
        # BFS layering from free left vertices
        dist = [inf] * n_left
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return match_l
        # DFS along the layers, iteratively
        ptr = [0] * n_left
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            stack = [root]
            path_right: list[int] = []
            while stack:
                u = stack[-1]
                advanced = False
                while ptr[u] < len(adjacency[u]):
                    v = adjacency[u][ptr[u]]
                    ptr[u] += 1
                    w = match_r[v]
                    if w == -1:
                        path_right.append(v)
                        for uu, vv in zip(stack, path_right):
                            match_l[uu] = vv
                            match_r[vv] = uu
                        stack = []
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        path_right.append(v)
                        stack.append(w)
                        advanced = True
                        break
                if not advanced:
                    dist[u] = inf
                    stack.pop()
                    if path_right:
                        path_right.pop()


@dataclass(frozen=True)
class MatchingResult:
    success: bool
    size: int
    assignment: dict  # slot -> (i, j)
    attempts: int = 1
    sequence: PeriodicSequence | None = None
    gaps: dict = field(default_factory=dict)  # target -> sorted cyclic gap set


def find_perfect_matching(graph: SlotGraph, attempts: int = 1) -> MatchingResult:
    M = graph.instance.M
    match = hopcroft_karp(graph.adjacency, len(graph.tokens))
    assignment = {s: graph.tokens[k] for s, k in enumerate(match) if k != -1}
    size = len(assignment)
    if size != M or len(graph.tokens) != M:
        return MatchingResult(False, size, assignment, attempts)
    seq = PeriodicSequence(tuple(assignment[s][0] for s in range(M)), graph.instance.n)
    gaps = {i: sorted(set(seq.cyclic_gaps(i))) for i in range(graph.instance.n)}
    return MatchingResult(True, size, assignment, attempts, seq, gaps)


def hall_violation(graph: SlotGraph) -> tuple[int, int] | None:
    """First cyclic slot interval (start, length) with fewer neighbours than slots."""
    M = graph.instance.M
    for start in range(M):
        nbrs: set[int] = set()
        for length in range(1, M + 1):
            nbrs.update(graph.adjacency[(start + length - 1) % M])
            if len(nbrs) < length:
                return start, length
    return None


def matching_precondition(values, epsilon: float) -> bool:
    """Whether every value is small enough for the (1+eps) guarantee."""
    vals = frequency_vector(values)
    n = len(vals)
    M = lcm(*(v.denominator for v in vals))
    if M <= 1:
        return False
    bound = epsilon / (4 + 2 * epsilon) * sqrt(2 / (n * log(M)))
    return all(float(v) <= bound for v in vals)


def gap_bounds(inst: SlotInstance, target: int) -> tuple[float, float]:
    """Gap range [M/A_i - 2 delta M, M/A_i + 2 delta M] guaranteed on success."""
    base = inst.M / inst.A[target]
    return base - 2 * inst.delta * inst.M, base + 2 * inst.delta * inst.M


def run_matching(values, rng: np.random.Generator | int, max_retries: int = DEFAULT_RETRIES) -> MatchingResult:
    """Retry with fresh offsets until a perfect matching exists.

    An integer ``rng`` is a seed: attempt r then uses stream (3, r).
    """
    if max_retries < 1:
        raise ValueError("max_retries must be >= 1")
    for attempt in range(1, max_retries + 1):
        gen = make_rng(rng, 3, attempt - 1) if isinstance(rng, (int, np.integer)) else rng
        result = find_perfect_matching(build_graph(build_instance(values, gen)), attempt)
        if result.success:
            return result
    raise MatchingFailedError(max_retries)


def matching_schedule(
    values, epsilon: float, rng: np.random.Generator | int, max_retries: int = DEFAULT_RETRIES
) -> PeriodicSequence:
    result = run_matching(values, rng, max_retries)
    seq = result.sequence
    if matching_precondition(values, epsilon):
        for i, gaps in result.gaps.items():
            if gaps[-1] > (1 + epsilon) * gaps[0] + 1e-9:
                raise AssertionError(f"target {i} gap ratio exceeds 1 + eps")
    return seq
