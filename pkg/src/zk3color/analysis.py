"""Closed-form probabilities and the sender's optimal cheat state.

Everything here is derived from the per-branch mean photon numbers: the
receiver's chance of identifying a commitment unaided, the chance a lie
survives the unveil check, the per-round and whole-protocol cheat bounds,
and a grid-plus-refinement search for the state that best straddles two
claims.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .optics import ApparatusParams, PolarizedState, branch_intensities, protocol_state

__all__ = [
    "CheatReport",
    "identification_probability",
    "lie_escape_probability",
    "state_escape_probabilities",
    "optimal_cheat_state",
    "round_cheat_probability",
    "total_cheat_probability",
    "hiding_probability",
    "round_identification_probability",
    "execution_identification_probability",
]


@dataclass(frozen=True)
class CheatReport:
    """Outcome of the cheat-state search for one pair of target claims."""

    best_state: PolarizedState
    angle: float
    targets: tuple[int, int]
    escape_probs: tuple[float, float, float]
    objective: float
    objective_kind: str


def _exclusion_probs(params: ApparatusParams) -> list[tuple[float, ...]]:
    """For each sent state j, probability that branch k's vertical clicks."""
    out = []
    for j in range(3):
        mu = branch_intensities(protocol_state(j, params), params)
        out.append(tuple(-math.expm1(-m) for m in mu.mu_v))
    return out


def identification_probability(params: ApparatusParams) -> float:
    """Chance the receiver identifies a uniformly chosen commitment unaided.

    Identification requires vertical clicks in both non-matching branches
    (the matching branch never clicks without dark counts).  The formula
    assumes dark_rate = 0; dark counts would both help and corrupt the
    exclusion logic, so the closed form refuses them.
    """
    if params.dark_rate > 0:
        raise ValueError("closed form assumes dark_rate = 0")
    probs = _exclusion_probs(params)
    total = 0.0
    for j in range(3):
        prod = 1.0
        for k in range(3):
            if k != j:
                prod *= probs[j][k]
        total += prod
    return total / 3.0


def lie_escape_probability(sent: int, claimed: int, params: ApparatusParams) -> float:
    """Chance that committing ``sent`` and claiming ``claimed`` passes the check.

    Under the impossibility-only policy with dark-free detectors the claim
    fails only on a vertical click in the claimed branch, so the escape is
    exp(-mu_v[claimed | sent]).  Claiming truthfully escapes with
    probability exactly 1.
    """
    mu = branch_intensities(protocol_state(sent, params), params)
    return math.exp(-mu.mu_v[claimed])


def state_escape_probabilities(
    state: PolarizedState, params: ApparatusParams
) -> tuple[float, float, float]:
    """Escape probability of each possible claim for an arbitrary state."""
    mu = branch_intensities(state, params)
    return tuple(math.exp(-m) for m in mu.mu_v)


def _cheat_objective(escapes: Sequence[float], targets: tuple[int, int], kind: str) -> float:
    pair = (escapes[targets[0]], escapes[targets[1]])
    if kind == "mean":
        return 0.5 * (pair[0] + pair[1])
    if kind == "min":
        return min(pair)
    raise ValueError(f"objective must be 'mean' or 'min', got {kind!r}")


def optimal_cheat_state(
    targets: tuple[int, int],
    params: ApparatusParams,
    objective: str = "mean",
    grid_points: int = 10_001,
    refine_tol: float = 1e-9,
) -> CheatReport:
    """Best single state for later claiming either of two target colors.

    The search space is the honest-energy circle h^2 + v^2 = mean_photon,
    parameterized by the polar angle psi in [0, pi/2]; anything off that
    circle would be flagged by an energy check (the vacuum trivially escapes
    every claim).  A dense grid scan (first maximum wins, i.e. smallest psi
    on ties) is followed by ternary refinement well below the requested
    angular tolerance.
    """
    t0, t1 = targets
    if t0 == t1:
        raise ValueError(f"target claims must be distinct, got {targets}")
    for t in targets:
        if t not in (0, 1, 2):
            raise ValueError(f"target claims must be in {{0, 1, 2}}, got {targets}")
    if grid_points < 10_000:
        raise ValueError("grid must have at least 10000 points")

    def value(psi: float) -> float:
        state = PolarizedState.from_angle(params.amplitude, psi)
        return _cheat_objective(state_escape_probabilities(state, params), targets, objective)

    grid = np.linspace(0.0, math.pi / 2, grid_points)
    values = [value(p) for p in grid]
    best = int(np.argmax(values))

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid_points - 1)]
    while hi - lo > refine_tol:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if value(m1) < value(m2):
            lo = m1
        else:
            hi = m2
    psi = 0.5 * (lo + hi)

    state = PolarizedState.from_angle(params.amplitude, psi)
    escapes = state_escape_probabilities(state, params)
    return CheatReport(
        best_state=state,
        angle=psi,
        targets=(t0, t1),
        escape_probs=escapes,
        objective=_cheat_objective(escapes, targets, objective),
        objective_kind=objective,
    )


def round_cheat_probability(m, p_escape):
    """Per-round survival of a prover holding one bad edge among m edges.

    The bad edge is challenged with probability 1/m; a challenged lie escapes
    with probability p_escape, any other edge passes for free.  Accepts
    scalars or arrays of m.
    """
    m_arr = np.asarray(m)
    if np.any(m_arr < 1):
        raise ValueError("edge count m must be >= 1")
    p = float(p_escape)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p_escape must be in [0, 1], got {p_escape}")
    result = 1.0 - (1.0 - p) / m_arr
    return result if isinstance(m, np.ndarray) else float(result)


def total_cheat_probability(m: int, p_escape: float, rounds: int | None = None) -> float:
    """Survival over a whole protocol run; rounds defaults to m^2."""
    if rounds is None:
        rounds = int(m) * int(m)
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    return float(round_cheat_probability(m, p_escape)) ** rounds


def hiding_probability(n: int, p_identify: float, attempts: int) -> float:
    """Chance a curious receiver ever reads off all n colors in one attempt.

    Treats the n per-vertex identifications in an attempt as independent with
    probability ``p_identify`` each, i.e. per-attempt success p^n, compounded
    over independent attempts.  This is an upper-bound approximation: in the
    actual protocol the per-round color multiset is tied together by a shared
    permutation, which lowers the joint success below p^n (see
    :func:`round_identification_probability` for the exact value).
    """
    if n < 1:
        raise ValueError(f"vertex count must be >= 1, got {n}")
    if attempts < 1:
        raise ValueError(f"attempts must be >= 1, got {attempts}")
    if not 0.0 <= p_identify <= 1.0:
        raise ValueError(f"p_identify must be in [0, 1], got {p_identify}")
    per_attempt = p_identify**n
    return 1.0 - (1.0 - per_attempt) ** attempts


def round_identification_probability(
    coloring: Sequence[int], params: ApparatusParams
) -> float:
    """Exact chance one round exposes every vertex of a committed coloring.

    Identification events are independent across vertices given the round's
    committed colors, but all vertices share one uniformly drawn color
    permutation; this averages the per-round product over the six
    permutations.  Depends on the coloring only through its color counts.
    """
    if params.dark_rate > 0:
        raise ValueError("closed form assumes dark_rate = 0")
    probs = _exclusion_probs(params)
    q = []
    for j in range(3):
        prod = 1.0
        for k in range(3):
            if k != j:
                prod *= probs[j][k]
        q.append(prod)

    counts = [0, 0, 0]
    for color in coloring:
        if color not in (0, 1, 2):
            raise ValueError(f"colors must be in {{0, 1, 2}}, got {color}")
        counts[color] += 1

    total = 0.0
    for perm in itertools.permutations((0, 1, 2)):
        prod = 1.0
        for color in range(3):
            prod *= q[perm[color]] ** counts[color]
        total += prod
    return total / 6.0


def execution_identification_probability(
    coloring: Sequence[int], params: ApparatusParams, rounds: int
) -> float:
    """Exact chance that at least one of ``rounds`` rounds exposes all colors."""
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    p_round = round_identification_probability(coloring, params)
    return 1.0 - (1.0 - p_round) ** rounds
