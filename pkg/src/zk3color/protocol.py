"""Prover/verifier round loop for the interactive 3-coloring proof.

One round: the prover draws a fresh color permutation and commits one signal
state per vertex; the verifier measures every commitment on arrival and
keeps only the click records; the verifier challenges a uniformly random
edge; the prover unveils the two committed colors on that edge; the verifier
accepts the round iff the claims differ, belong to the palette, and are
consistent with the stored records.  A run accepts iff every round does.

The quantum channel is an in-process hand-off of opaque state handles
(:class:`CommitBundle`); verifier-side code only ever sees click records.
Serializing amplitudes would let a "verifier" read the committed colors
directly, so opacity here stands in for quantum indistinguishability.

Two execution paths share the same per-detector Bernoulli model:

* :func:`run_protocol` plays a single execution round by round through the
  scalar commitment ops and returns full transcripts.
* :func:`run_batch` evaluates many independent executions with vectorized
  sampling, deriving one random stream per execution from (seed, index) so
  aggregate statistics do not depend on worker scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .graph import PERMUTATIONS, Graph, best_near_coloring, is_valid_3coloring
from .optics import ApparatusParams, ClickRecord, click_probability_tables
from .qbc import (
    Claim,
    VerificationPolicy,
    commit,
    discriminate_unaided,
    measure_commitment,
    verify_unveil,
)

__all__ = [
    "RejectReason",
    "Verdict",
    "Challenge",
    "Unveil",
    "RoundTranscript",
    "ProtocolConfig",
    "CommitBundle",
    "ProtocolResult",
    "CuriousReport",
    "BatchResult",
    "HonestProver",
    "CheatingProver",
    "HonestVerifier",
    "CuriousVerifier",
    "honest_prover",
    "cheating_prover",
    "curious_verifier",
    "verifier_check",
    "run_protocol",
    "run_batch",
]

_PERM_ARRAY = np.array(PERMUTATIONS, dtype=np.int64)

# preferred lie for each committed color: the nearest other color in angle,
# which maximizes the escape probability; ties broken toward the lower index
_LIE_FOR = (1, 0, 1)


class RejectReason(Enum):
    EQUAL_CLAIMS = "equal claims"
    OUT_OF_SET = "out-of-set claim"
    CONSISTENCY = "consistency"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: RejectReason | None = None

    def __post_init__(self) -> None:
        if self.accepted == (self.reason is not None):
            raise ValueError("reason must be present exactly when rejecting")


@dataclass(frozen=True)
class Challenge:
    edge_index: int


@dataclass(frozen=True)
class Unveil:
    """Claimed color indices for the two endpoints of the challenged edge.

    Deliberately unvalidated: a cheating prover may put anything here, and
    the verifier's own check must catch out-of-palette values.
    """

    claim_u: int
    claim_v: int


@dataclass(frozen=True)
class RoundTranscript:
    """Everything observable about one round, plus optional diagnostics.

    ``committed`` (the prover's secret colors) is populated only when the
    run was configured with ``record_committed`` and exists for analysis of
    simulations; it is never available to verifier strategies.
    """

    click_records: tuple[ClickRecord, ...]
    challenge: Challenge | None
    unveil: Unveil | None
    verdict: Verdict
    committed: tuple[int, ...] | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ProtocolConfig:
    """Run settings; ``rounds=None`` means the default m**2."""

    rounds: int | None = None
    seed: int = 0
    policy: VerificationPolicy = VerificationPolicy.IMPOSSIBILITY_ONLY
    params: ApparatusParams = field(default_factory=ApparatusParams)
    synthetic_escape: float | None = None
    record_committed: bool = False

    def __post_init__(self) -> None:
        if self.rounds is not None and self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.synthetic_escape is not None:
            if not 0.0 <= self.synthetic_escape <= 1.0:
                raise ValueError(f"synthetic_escape must be in [0, 1], got {self.synthetic_escape}")
            if self.policy is not VerificationPolicy.IMPOSSIBILITY_ONLY:
                raise ValueError("synthetic escape mode models the impossibility-only check")

    def resolve_rounds(self, graph: Graph) -> int:
        rounds = self.rounds if self.rounds is not None else graph.m * graph.m
        if rounds < 1:
            raise ValueError("edgeless graphs need an explicit round count")
        return rounds


class CommitBundle:
    """Opaque handles for one round's committed states.

    The only operation is measurement; nothing on the public surface exposes
    amplitudes or committed colors to the receiving side.
    """

    __slots__ = ("_states",)

    def __init__(self, states: Sequence) -> None:
        self._states = tuple(states)

    def __len__(self) -> int:
        return len(self._states)

    def measure_all(
        self, params: ApparatusParams, rng: np.random.Generator
    ) -> tuple[ClickRecord, ...]:
        """Measure every handle in vertex order, consuming the states."""
        return tuple(measure_commitment(s, params, rng) for s in self._states)


@dataclass(frozen=True)
class CuriousReport:
    """What a curious verifier learned from click records alone."""

    success: bool
    full_rounds: int
    per_round: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class ProtocolResult:
    accepted: bool
    transcripts: tuple[RoundTranscript, ...]
    curious: CuriousReport | None = None


@dataclass(frozen=True)
class BatchResult:
    """Aggregate of independent executions; flags are per-execution."""

    executions: int
    accepted_flags: np.ndarray
    curious_flags: np.ndarray | None = None

    @property
    def accepted_count(self) -> int:
        return int(self.accepted_flags.sum())

    @property
    def acceptance_rate(self) -> float:
        return self.accepted_count / self.executions

    @property
    def curious_success_count(self) -> int:
        if self.curious_flags is None:
            raise ValueError("batch was run without a curious verifier")
        return int(self.curious_flags.sum())

    @property
    def curious_success_rate(self) -> float:
        return self.curious_success_count / self.executions


class HonestProver:
    """Commits a permuted valid coloring each round and unveils truthfully."""

    def __init__(self, graph: Graph, coloring: Sequence[int]):
        if not is_valid_3coloring(graph, coloring):
            raise ValueError("honest prover needs a valid 3-coloring")
        self.graph = graph
        self.base_coloring = tuple(int(c) for c in coloring)

    def committed_colors(self, rng: np.random.Generator) -> tuple[int, ...]:
        perm = PERMUTATIONS[int(rng.integers(6))]
        return tuple(perm[c] for c in self.base_coloring)

    def unveil_round(
        self, committed: Sequence[int], edge: tuple[int, int], rng: np.random.Generator
    ) -> tuple[Unveil, tuple[bool, bool]]:
        u, v = edge
        return Unveil(committed[u], committed[v]), (False, False)

    # vectorized twins ----------------------------------------------------

    def committed_matrix(self, rounds: int, rng: np.random.Generator) -> np.ndarray:
        perm_idx = rng.integers(0, 6, size=rounds)
        base = np.array(self.base_coloring, dtype=np.int64)
        return _PERM_ARRAY[perm_idx][:, base]

    def unveil_arrays(
        self,
        committed: np.ndarray,
        edge_u: np.ndarray,
        edge_v: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        idx = np.arange(committed.shape[0])
        claims_u = committed[idx, edge_u]
        claims_v = committed[idx, edge_v]
        lied = np.zeros(committed.shape[0], dtype=bool)
        return claims_u, claims_v, lied


class CheatingProver:
    """Commits the best near-coloring and lies on challenged bad edges.

    A bad edge stays monochromatic under every color permutation, so bad
    rounds are exactly the rounds whose challenge lands on a bad base edge.
    The prover then picks one endpoint uniformly at random and claims the
    nearest other color for it, keeping the truthful claim on the other.
    """

    def __init__(self, graph: Graph):
        coloring, bad = best_near_coloring(graph)
        if not bad:
            raise ValueError("graph is 3-colorable; nothing to cheat about")
        self.graph = graph
        self.base_coloring = coloring
        self.bad_edge_set = bad

    @property
    def bad_edge_count(self) -> int:
        return len(self.bad_edge_set)

    def committed_colors(self, rng: np.random.Generator) -> tuple[int, ...]:
        perm = PERMUTATIONS[int(rng.integers(6))]
        return tuple(perm[c] for c in self.base_coloring)

    def unveil_round(
        self, committed: Sequence[int], edge: tuple[int, int], rng: np.random.Generator
    ) -> tuple[Unveil, tuple[bool, bool]]:
        u, v = edge
        if committed[u] != committed[v]:
            return Unveil(committed[u], committed[v]), (False, False)
        lie = _LIE_FOR[committed[u]]
        if int(rng.integers(2)) == 0:
            return Unveil(lie, committed[v]), (True, False)
        return Unveil(committed[u], lie), (False, True)

    # vectorized twins ----------------------------------------------------

    def committed_matrix(self, rounds: int, rng: np.random.Generator) -> np.ndarray:
        perm_idx = rng.integers(0, 6, size=rounds)
        base = np.array(self.base_coloring, dtype=np.int64)
        return _PERM_ARRAY[perm_idx][:, base]

    def unveil_arrays(
        self,
        committed: np.ndarray,
        edge_u: np.ndarray,
        edge_v: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        idx = np.arange(committed.shape[0])
        claims_u = committed[idx, edge_u].copy()
        claims_v = committed[idx, edge_v].copy()
        # endpoint choice is drawn for every round so the stream layout does
        # not depend on which edges were challenged
        pick_u = rng.integers(0, 2, size=committed.shape[0]) == 0
        lied = claims_u == claims_v
        lie_colors = np.array(_LIE_FOR, dtype=np.int64)[claims_u]
        claims_u = np.where(lied & pick_u, lie_colors, claims_u)
        claims_v = np.where(lied & ~pick_u, lie_colors, claims_v)
        return claims_u, claims_v, lied


class HonestVerifier:
    """Draws uniform edge challenges and applies the configured check."""

    curious = False

    def draw_challenge(self, m: int, rng: np.random.Generator) -> int:
        return int(rng.integers(m))

    def draw_challenges(self, m: int, rounds: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, m, size=rounds)


class CuriousVerifier(HonestVerifier):
    """Honest verifier that also tries to read every commitment unaided.

    Succeeds if some single round identifies all vertices: one round's
    identified states reveal the coloring up to the (unknowable) global
    permutation, while partial reads from different rounds cannot be stitched
    together because each round is permuted afresh.
    """

    curious = True

    def analyze_records(self, records: Sequence[ClickRecord]) -> tuple[int, ...]:
        ids = tuple(discriminate_unaided(r) for r in records)
        return tuple(-1 if i is None else i for i in ids)

    def analyze_v_clicks(self, v_clicks: np.ndarray) -> np.ndarray:
        """Per-round flags: did exactly-two-click exclusion name every vertex."""
        identified = v_clicks.sum(axis=-1) == 2
        return identified.all(axis=-1)


def honest_prover(graph: Graph, coloring: Sequence[int]) -> HonestProver:
    return HonestProver(graph, coloring)


def cheating_prover(graph: Graph) -> CheatingProver:
    return CheatingProver(graph)


def curious_verifier() -> CuriousVerifier:
    return CuriousVerifier()


def verifier_check(
    unveil: Unveil,
    record_u: ClickRecord,
    record_v: ClickRecord,
    policy: VerificationPolicy = VerificationPolicy.IMPOSSIBILITY_ONLY,
) -> Verdict:
    """Round verdict: equal claims, then palette membership, then consistency."""
    if unveil.claim_u == unveil.claim_v:
        return Verdict(False, RejectReason.EQUAL_CLAIMS)
    if unveil.claim_u not in (0, 1, 2) or unveil.claim_v not in (0, 1, 2):
        return Verdict(False, RejectReason.OUT_OF_SET)
    if not verify_unveil(Claim(unveil.claim_u), record_u, policy):
        return Verdict(False, RejectReason.CONSISTENCY)
    if not verify_unveil(Claim(unveil.claim_v), record_v, policy):
        return Verdict(False, RejectReason.CONSISTENCY)
    return Verdict(True)


def _derive_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(index))))


def run_protocol(
    graph: Graph,
    prover: HonestProver | CheatingProver,
    verifier: HonestVerifier,
    config: ProtocolConfig,
) -> ProtocolResult:
    """Play one full execution round by round, with transcripts.

    Deterministic given ``config.seed``: per round the stream is consumed in
    the order commit-measure, challenge, unveil, synthetic-escape draw.
    """
    if len(prover.base_coloring) != graph.n:
        raise ValueError("prover coloring does not match the graph")
    rounds = config.resolve_rounds(graph)
    rng = _derive_rng(config.seed, 0)
    params = config.params

    transcripts: list[RoundTranscript] = []
    accepted = True
    full_rounds = 0
    per_round_ids: list[tuple[int, ...]] = []

    for _ in range(rounds):
        committed = prover.committed_colors(rng)
        bundle = CommitBundle([commit(c, params) for c in committed])
        records = bundle.measure_all(params, rng)

        if graph.m > 0:
            edge_index = verifier.draw_challenge(graph.m, rng)
            edge = graph.edges[edge_index]
            unveil, lied = prover.unveil_round(committed, edge, rng)
            if config.synthetic_escape is None:
                verdict = verifier_check(
                    unveil, records[edge[0]], records[edge[1]], config.policy
                )
            else:
                verdict = _synthetic_verdict(unveil, any(lied), config.synthetic_escape, rng)
            challenge: Challenge | None = Challenge(edge_index)
        else:
            challenge, unveil, verdict = None, None, Verdict(True)

        accepted = accepted and verdict.accepted
        if verifier.curious:
            ids = verifier.analyze_records(records)
            per_round_ids.append(ids)
            if all(i >= 0 for i in ids):
                full_rounds += 1
        transcripts.append(
            RoundTranscript(
                click_records=records,
                challenge=challenge,
                unveil=unveil,
                verdict=verdict,
                committed=committed if config.record_committed else None,
            )
        )

    curious = None
    if verifier.curious:
        curious = CuriousReport(
            success=full_rounds > 0,
            full_rounds=full_rounds,
            per_round=tuple(per_round_ids),
        )
    return ProtocolResult(accepted=accepted, transcripts=tuple(transcripts), curious=curious)


def _synthetic_verdict(
    unveil: Unveil, lied: bool, p_escape: float, rng: np.random.Generator
) -> Verdict:
    # claims-differ and palette checks stay structural; only the physical
    # consistency outcome of a lie is replaced by a Bernoulli draw
    if unveil.claim_u == unveil.claim_v:
        return Verdict(False, RejectReason.EQUAL_CLAIMS)
    if unveil.claim_u not in (0, 1, 2) or unveil.claim_v not in (0, 1, 2):
        return Verdict(False, RejectReason.OUT_OF_SET)
    if lied and not rng.random() < p_escape:
        return Verdict(False, RejectReason.CONSISTENCY)
    return Verdict(True)


def _execute_fast(
    graph: Graph,
    prover,
    verifier,
    config: ProtocolConfig,
    rng: np.random.Generator,
    tables: tuple[np.ndarray, np.ndarray],
) -> tuple[bool, bool | None]:
    """Vectorized single execution: (accepted, curious success or None).

    Stream layout per execution: permutations, challenges, click uniforms
    (skipped when nothing reads clicks), unveil draws, synthetic draws.
    """
    rounds = config.resolve_rounds(graph)
    committed = prover.committed_matrix(rounds, rng)
    challenges = (
        verifier.draw_challenges(graph.m, rounds, rng) if graph.m > 0 else None
    )

    synthetic = config.synthetic_escape is not None
    want_clicks = (not synthetic) or verifier.curious
    v_clicks = None
    h_clicks = None
    if want_clicks:
        p_h, p_v = tables
        u = rng.random((rounds, graph.n, 6))
        h_clicks = u[..., 0:3] < p_h[committed]
        v_clicks = u[..., 3:6] < p_v[committed]

    if challenges is None:
        accepted = True
    else:
        edges = np.array(graph.edges, dtype=np.int64)
        edge_u = edges[challenges, 0]
        edge_v = edges[challenges, 1]
        claims_u, claims_v, lied = prover.unveil_arrays(committed, edge_u, edge_v, rng)
        ok = claims_u != claims_v
        if synthetic:
            escapes = rng.random(rounds) < config.synthetic_escape
            ok &= ~lied | escapes
        else:
            idx = np.arange(rounds)
            ok &= ~v_clicks[idx, edge_u, claims_u]
            ok &= ~v_clicks[idx, edge_v, claims_v]
            if config.policy is VerificationPolicy.STRICT_HORIZONTAL:
                ok &= h_clicks[idx, edge_u].all(axis=-1)
                ok &= h_clicks[idx, edge_v].all(axis=-1)
        accepted = bool(ok.all())

    curious_success = None
    if verifier.curious:
        curious_success = bool(verifier.analyze_v_clicks(v_clicks).any())
    return accepted, curious_success


def run_batch(
    graph: Graph,
    prover,
    verifier: HonestVerifier,
    config: ProtocolConfig,
    executions: int,
    workers: int = 1,
) -> BatchResult:
    """Evaluate many independent executions of the protocol.

    Execution i uses the stream derived from (config.seed, i), so the
    per-execution outcome sequence is identical for any worker count; only
    wall-clock time depends on scheduling.
    """
    if executions < 1:
        raise ValueError(f"executions must be >= 1, got {executions}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if len(prover.base_coloring) != graph.n:
        raise ValueError("prover coloring does not match the graph")
    config.resolve_rounds(graph)  # validate early

    tables = click_probability_tables(config.params)
    accepted = np.zeros(executions, dtype=bool)
    curious = np.zeros(executions, dtype=bool) if verifier.curious else None

    def run_range(start: int, stop: int) -> None:
        for i in range(start, stop):
            acc, cur = _execute_fast(
                graph, prover, verifier, config, _derive_rng(config.seed, i), tables
            )
            accepted[i] = acc
            if curious is not None:
                curious[i] = cur

    if workers == 1:
        run_range(0, executions)
    else:
        chunk = -(-executions // workers)
        spans = [
            (start, min(start + chunk, executions))
            for start in range(0, executions, chunk)
        ]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda span: run_range(*span), spans))

    return BatchResult(executions=executions, accepted_flags=accepted, curious_flags=curious)
