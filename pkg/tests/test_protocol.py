import math

import numpy as np
import pytest

import oracle
from zk3color.graph import Graph
from zk3color.optics import ClickRecord, PolarizedState
from zk3color.protocol import (
    CommitBundle,
    CuriousVerifier,
    HonestVerifier,
    ProtocolConfig,
    RejectReason,
    Unveil,
    Verdict,
    cheating_prover,
    curious_verifier,
    honest_prover,
    run_batch,
    run_protocol,
    verifier_check,
)
from zk3color.qbc import VerificationPolicy, commit

PERM_SET = {(a, b, c) for a in range(3) for b in range(3) for c in range(3) if {a, b, c} == {0, 1, 2}}


def record(v, h=(True, True, True)) -> ClickRecord:
    return ClickRecord(h_click=tuple(h), v_click=tuple(v))


class TestConfig:
    def test_defaults_resolve_to_m_squared(self, k3, petersen):
        cfg = ProtocolConfig()
        assert cfg.resolve_rounds(k3) == 9
        assert cfg.resolve_rounds(petersen) == 225

    def test_explicit_rounds(self, k3):
        assert ProtocolConfig(rounds=5).resolve_rounds(k3) == 5

    def test_edgeless_needs_explicit_rounds(self):
        lone = Graph(n=1, edges=())
        with pytest.raises(ValueError):
            ProtocolConfig().resolve_rounds(lone)
        assert ProtocolConfig(rounds=1).resolve_rounds(lone) == 1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rounds": 0},
            {"seed": -1},
            {"synthetic_escape": 1.2},
            {"synthetic_escape": 0.4, "policy": VerificationPolicy.STRICT_HORIZONTAL},
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ProtocolConfig(**kwargs)


class TestVerdict:
    def test_reason_iff_reject(self):
        Verdict(True)
        Verdict(False, RejectReason.CONSISTENCY)
        with pytest.raises(ValueError):
            Verdict(True, RejectReason.CONSISTENCY)
        with pytest.raises(ValueError):
            Verdict(False)


class TestVerifierCheck:
    def test_equal_claims_rejected_first(self):
        # even with a disqualifying click, equal claims is the reported reason
        verdict = verifier_check(Unveil(1, 1), record((False, True, False)), record((False, False, False)))
        assert not verdict.accepted
        assert verdict.reason is RejectReason.EQUAL_CLAIMS

    def test_out_of_palette_claim(self):
        verdict = verifier_check(Unveil(0, 5), record((False,) * 3), record((False,) * 3))
        assert verdict.reason is RejectReason.OUT_OF_SET

    def test_impossible_click_rejected(self):
        verdict = verifier_check(Unveil(0, 1), record((True, False, False)), record((False,) * 3))
        assert verdict.reason is RejectReason.CONSISTENCY

    def test_honest_round_accepted(self):
        verdict = verifier_check(Unveil(0, 1), record((False, True, True)), record((True, False, True)))
        assert verdict.accepted and verdict.reason is None

    def test_strict_policy_flows_through(self):
        quiet = record((False, False, False), h=(True, True, False))
        assert verifier_check(Unveil(0, 1), quiet, quiet).accepted
        strict = verifier_check(
            Unveil(0, 1), quiet, quiet, VerificationPolicy.STRICT_HORIZONTAL
        )
        assert strict.reason is RejectReason.CONSISTENCY


class TestHonestProver:
    def test_rejects_invalid_coloring(self, k3):
        with pytest.raises(ValueError):
            honest_prover(k3, (0, 0, 1))

    def test_committed_colors_are_permuted_base(self, k3):
        prover = honest_prover(k3, (0, 1, 2))
        rng = np.random.default_rng(3)
        for _ in range(50):
            committed = prover.committed_colors(rng)
            assert committed in PERM_SET

    def test_permutation_uniformity(self, k3):
        # base (0, 1, 2) makes the committed row the permutation itself
        prover = honest_prover(k3, (0, 1, 2))
        rounds = 6000
        matrix = prover.committed_matrix(rounds, np.random.default_rng(11))
        counts = {}
        for row in map(tuple, matrix):
            counts[row] = counts.get(row, 0) + 1
        sigma = math.sqrt((1 / 6) * (5 / 6) / rounds)
        assert set(counts) == PERM_SET
        for count in counts.values():
            assert abs(count / rounds - 1 / 6) < 3 * sigma

    def test_unveil_is_truthful_and_distinct(self, c5):
        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        rng = np.random.default_rng(5)
        for _ in range(200):
            committed = prover.committed_colors(rng)
            for edge in c5.edges:
                unveil, lied = prover.unveil_round(committed, edge, rng)
                assert lied == (False, False)
                assert unveil.claim_u == committed[edge[0]]
                assert unveil.claim_v == committed[edge[1]]
                assert unveil.claim_u != unveil.claim_v


class TestCheatingProver:
    def test_rejects_colorable_graph(self, k3):
        with pytest.raises(ValueError):
            cheating_prover(k3)

    def test_k4_setup(self, k4):
        prover = cheating_prover(k4)
        assert prover.bad_edge_count == 1
        assert prover.bad_edge_set == frozenset({(0, 1)})

    def test_good_edge_unveil_truthful(self, k4):
        prover = cheating_prover(k4)
        rng = np.random.default_rng(7)
        committed = prover.committed_colors(rng)
        unveil, lied = prover.unveil_round(committed, (2, 3), rng)
        assert lied == (False, False)
        assert (unveil.claim_u, unveil.claim_v) == (committed[2], committed[3])

    def test_bad_edge_lie_is_adjacent_color(self, k4):
        prover = cheating_prover(k4)
        rng = np.random.default_rng(9)
        for _ in range(500):
            committed = prover.committed_colors(rng)
            unveil, lied = prover.unveil_round(committed, (0, 1), rng)
            assert committed[0] == committed[1]
            assert lied in ((True, False), (False, True))
            liar_claim = unveil.claim_u if lied[0] else unveil.claim_v
            honest_claim = unveil.claim_v if lied[0] else unveil.claim_u
            assert honest_claim == committed[0]
            assert liar_claim != committed[0]
            assert abs(liar_claim - committed[0]) == 1
            assert unveil.claim_u != unveil.claim_v

    def test_bad_edge_escape_frequency(self, k4, params):
        # challenge the bad edge every round: the lying endpoint survives the
        # consistency check with the adjacent-color escape probability
        from zk3color.optics import click_probability_tables

        prover = cheating_prover(k4)
        rng = np.random.default_rng(14)
        rounds = 10_000
        committed = prover.committed_matrix(rounds, rng)
        zeros = np.zeros(rounds, dtype=np.int64)
        ones = np.ones(rounds, dtype=np.int64)
        claims_u, claims_v, lied = prover.unveil_arrays(committed, zeros, ones, rng)
        assert lied.all()
        liar_claims = np.where(claims_u != committed[:, 0], claims_u, claims_v)
        liar_committed = committed[:, 0]
        _, p_v = click_probability_tables(params)
        escaped = rng.random(rounds) >= p_v[liar_committed, liar_claims]
        expected = oracle.escape(0, 1, params)
        sigma = math.sqrt(expected * (1 - expected) / rounds)
        assert abs(escaped.mean() - expected) < 3 * sigma

    def test_endpoint_choice_is_balanced(self, k4):
        prover = cheating_prover(k4)
        rng = np.random.default_rng(13)
        picks = 0
        trials = 10_000
        for _ in range(trials):
            committed = prover.committed_colors(rng)
            _, lied = prover.unveil_round(committed, (0, 1), rng)
            picks += lied[0]
        sigma = math.sqrt(0.25 / trials)
        assert abs(picks / trials - 0.5) < 3 * sigma

    def test_vectorized_unveil_semantics(self, k4):
        prover = cheating_prover(k4)
        rng = np.random.default_rng(15)
        rounds = 4000
        committed = prover.committed_matrix(rounds, rng)
        edges = np.array(k4.edges)
        challenges = rng.integers(0, k4.m, size=rounds)
        edge_u, edge_v = edges[challenges, 0], edges[challenges, 1]
        claims_u, claims_v, lied = prover.unveil_arrays(committed, edge_u, edge_v, rng)

        idx = np.arange(rounds)
        true_u = committed[idx, edge_u]
        true_v = committed[idx, edge_v]
        assert np.array_equal(lied, true_u == true_v)
        # good rounds are truthful
        assert np.array_equal(claims_u[~lied], true_u[~lied])
        assert np.array_equal(claims_v[~lied], true_v[~lied])
        # lied rounds change exactly one endpoint to an adjacent color
        changed_u = claims_u != true_u
        changed_v = claims_v != true_v
        assert np.array_equal(changed_u ^ changed_v, lied)
        assert np.all(np.abs(claims_u[lied & changed_u] - true_u[lied & changed_u]) == 1)
        assert np.all(np.abs(claims_v[lied & changed_v] - true_v[lied & changed_v]) == 1)
        assert np.all(claims_u[lied] != claims_v[lied])


class TestRunProtocol:
    def test_k3_honest_always_accepts(self, k3):
        prover = honest_prover(k3, (0, 1, 2))
        for seed in range(200):
            result = run_protocol(k3, prover, HonestVerifier(), ProtocolConfig(seed=seed))
            assert result.accepted
            assert len(result.transcripts) == 9

    def test_petersen_default_rounds(self, petersen):
        prover = honest_prover(petersen, oracle.first_valid_coloring(petersen))
        result = run_protocol(petersen, prover, HonestVerifier(), ProtocolConfig(seed=1))
        assert result.accepted
        assert len(result.transcripts) == 225

    def test_deterministic_transcripts(self, c5):
        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        cfg = ProtocolConfig(seed=42)
        a = run_protocol(c5, prover, HonestVerifier(), cfg)
        b = run_protocol(c5, prover, HonestVerifier(), cfg)
        assert a.accepted == b.accepted
        assert a.transcripts == b.transcripts
        assert repr(a.transcripts) == repr(b.transcripts)

    def test_different_seeds_differ(self, c5):
        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        a = run_protocol(c5, prover, HonestVerifier(), ProtocolConfig(seed=1))
        b = run_protocol(c5, prover, HonestVerifier(), ProtocolConfig(seed=2))
        assert a.transcripts != b.transcripts

    def test_transcript_shape(self, k3):
        prover = honest_prover(k3, (0, 1, 2))
        result = run_protocol(k3, prover, HonestVerifier(), ProtocolConfig(seed=3))
        for t in result.transcripts:
            assert len(t.click_records) == 3
            assert 0 <= t.challenge.edge_index < 3
            assert t.verdict.accepted
            assert t.committed is None

    def test_record_committed_diagnostics(self, k3):
        prover = honest_prover(k3, (0, 1, 2))
        cfg = ProtocolConfig(seed=3, record_committed=True)
        result = run_protocol(k3, prover, HonestVerifier(), cfg)
        for t in result.transcripts:
            assert t.committed in PERM_SET
            assert t.unveil.claim_u == t.committed[k3.edges[t.challenge.edge_index][0]]

    def test_coloring_length_mismatch(self, k3, c5):
        prover = honest_prover(k3, (0, 1, 2))
        with pytest.raises(ValueError):
            run_protocol(c5, prover, HonestVerifier(), ProtocolConfig())

    def test_edgeless_graph_auto_accepts(self):
        lone = Graph(n=1, edges=())
        prover = honest_prover(lone, (0,))
        result = run_protocol(lone, prover, HonestVerifier(), ProtocolConfig(rounds=1, seed=5))
        assert result.accepted
        t = result.transcripts[0]
        assert t.challenge is None and t.unveil is None

    def test_cheating_acceptance_rate_scalar_path(self, k4, params):
        # scalar engine against the closed-form prediction
        prover = cheating_prover(k4)
        expected = (1 - (1 - oracle.escape(0, 1, params)) / 6) ** 36
        runs = 1500
        accepted = sum(
            run_protocol(k4, prover, HonestVerifier(), ProtocolConfig(seed=s)).accepted
            for s in range(runs)
        )
        sigma = math.sqrt(expected * (1 - expected) / runs)
        assert abs(accepted / runs - expected) < 3 * sigma

    def test_synthetic_escape_extremes(self, k4):
        prover = cheating_prover(k4)
        sure = ProtocolConfig(seed=8, synthetic_escape=1.0)
        assert run_protocol(k4, prover, HonestVerifier(), sure).accepted
        # escape 0: accepted iff the bad edge is never challenged
        doomed = ProtocolConfig(seed=8, synthetic_escape=0.0, record_committed=True)
        result = run_protocol(k4, prover, HonestVerifier(), doomed)
        challenged_bad = any(
            t.committed[0] == t.committed[1] and t.challenge.edge_index == 0
            for t in result.transcripts
        )
        assert result.accepted == (not challenged_bad)


class TestCuriousVerifier:
    def test_single_vertex_rate_matches_marginal(self, params):
        from zk3color.analysis import identification_probability

        lone = Graph(n=1, edges=())
        prover = honest_prover(lone, (0,))
        cfg = ProtocolConfig(rounds=1, seed=77)
        batch = run_batch(lone, prover, curious_verifier(), cfg, 100_000)
        expected = identification_probability(params)
        sigma = math.sqrt(expected * (1 - expected) / batch.executions)
        assert abs(batch.curious_success_rate - expected) < 3 * sigma

    def test_identifications_are_correct(self, c5):
        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        cfg = ProtocolConfig(seed=21, rounds=200, record_committed=True)
        result = run_protocol(c5, prover, curious_verifier(), cfg)
        assert result.curious is not None
        seen = 0
        for t, ids in zip(result.transcripts, result.curious.per_round):
            for vertex, guess in enumerate(ids):
                if guess >= 0:
                    seen += 1
                    assert guess == t.committed[vertex]
        assert seen > 0

    def test_success_iff_some_full_round(self, c5):
        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        cfg = ProtocolConfig(seed=22, rounds=400)
        result = run_protocol(c5, prover, curious_verifier(), cfg)
        full = sum(all(g >= 0 for g in ids) for ids in result.curious.per_round)
        assert result.curious.full_rounds == full
        assert result.curious.success == (full > 0)

    def test_c5_rate_matches_exact_prediction(self, c5, params):
        from zk3color.analysis import execution_identification_probability

        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        batch = run_batch(c5, prover, curious_verifier(), ProtocolConfig(seed=23), 20_000)
        expected = execution_identification_probability((0, 1, 0, 1, 2), params, 25)
        sigma = math.sqrt(expected * (1 - expected) / batch.executions)
        assert abs(batch.curious_success_rate - expected) < 3 * sigma


class TestRunBatch:
    def test_worker_count_does_not_change_results(self, k4):
        prover = cheating_prover(k4)
        cfg = ProtocolConfig(seed=5)
        flags = [
            run_batch(k4, prover, HonestVerifier(), cfg, 2000, workers=w).accepted_flags
            for w in (1, 2, 4)
        ]
        assert np.array_equal(flags[0], flags[1])
        assert np.array_equal(flags[0], flags[2])

    def test_curious_flags_tracked(self, c5):
        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        batch = run_batch(c5, prover, curious_verifier(), ProtocolConfig(seed=6), 500)
        assert batch.curious_flags is not None
        assert batch.curious_success_count == int(batch.curious_flags.sum())

    def test_curious_access_requires_curious_run(self, k3):
        prover = honest_prover(k3, (0, 1, 2))
        batch = run_batch(k3, prover, HonestVerifier(), ProtocolConfig(seed=7), 10)
        with pytest.raises(ValueError):
            _ = batch.curious_success_count

    def test_rejects_bad_arguments(self, k3):
        prover = honest_prover(k3, (0, 1, 2))
        with pytest.raises(ValueError):
            run_batch(k3, prover, HonestVerifier(), ProtocolConfig(), 0)
        with pytest.raises(ValueError):
            run_batch(k3, prover, HonestVerifier(), ProtocolConfig(), 10, workers=0)

    def test_honest_batch_never_rejects(self, c5):
        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        batch = run_batch(c5, prover, HonestVerifier(), ProtocolConfig(seed=8), 3000)
        assert batch.accepted_count == 3000

    def test_synthetic_batch_matches_bernoulli_formula(self, k4):
        prover = cheating_prover(k4)
        cfg = ProtocolConfig(seed=9, synthetic_escape=0.4)
        batch = run_batch(k4, prover, HonestVerifier(), cfg, 20_000)
        expected = 0.9**36
        sigma = math.sqrt(expected * (1 - expected) / batch.executions)
        assert abs(batch.acceptance_rate - expected) < 3 * sigma

    def test_strict_policy_batch_matches_closed_form(self, k3, params):
        # strict checking demands all six horizontal clicks on the challenged
        # records; for the triangle the committed pair is always two distinct
        # states, so the round survival averages over the three color pairs
        p_all = [
            math.prod(oracle.click(oracle.mu_h(j, k, params)) for k in range(3))
            for j in range(3)
        ]
        round_accept = (p_all[0] * p_all[1] + p_all[1] * p_all[2] + p_all[0] * p_all[2]) / 3
        expected = round_accept**9
        cfg = ProtocolConfig(seed=61, policy=VerificationPolicy.STRICT_HORIZONTAL)
        batch = run_batch(k3, honest_prover(k3, (0, 1, 2)), HonestVerifier(), cfg, 20_000)
        sigma = math.sqrt(expected * (1 - expected) / batch.executions)
        assert abs(batch.acceptance_rate - expected) < 3 * sigma

    def test_synthetic_mode_still_feeds_curious_verifier(self, c5, params):
        from zk3color.analysis import execution_identification_probability

        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        cfg = ProtocolConfig(seed=10, synthetic_escape=0.4)
        batch = run_batch(c5, prover, curious_verifier(), cfg, 10_000)
        assert batch.accepted_count == batch.executions  # honest prover never lies
        expected = execution_identification_probability((0, 1, 0, 1, 2), params, 25)
        sigma = math.sqrt(expected * (1 - expected) / batch.executions)
        assert abs(batch.curious_success_rate - expected) < 3 * sigma


class TestInformationHiding:
    def test_bundle_is_opaque(self, params):
        bundle = CommitBundle([commit(0, params), commit(1, params)])
        public = [name for name in dir(bundle) if not name.startswith("_")]
        assert public == ["measure_all"]
        assert len(bundle) == 2
        with pytest.raises(AttributeError):
            bundle.states  # noqa: B018
        records = bundle.measure_all(params, np.random.default_rng(1))
        assert all(isinstance(r, ClickRecord) for r in records)

    def test_bundle_slots_block_injection(self, params):
        bundle = CommitBundle([commit(0, params)])
        with pytest.raises(AttributeError):
            bundle.extra = 1

    def test_transcript_carries_no_amplitudes(self, k3):
        prover = honest_prover(k3, (0, 1, 2))
        result = run_protocol(k3, prover, HonestVerifier(), ProtocolConfig(seed=2))
        for t in result.transcripts:
            assert not any(isinstance(r, PolarizedState) for r in t.click_records)
            for field_value in (t.challenge, t.unveil, t.verdict):
                assert not isinstance(field_value, PolarizedState)

    def test_verifier_sees_only_click_data(self, c5):
        seen = []

        class SpyVerifier(CuriousVerifier):
            def draw_challenge(self, m, rng):
                seen.append(("challenge", m))
                return super().draw_challenge(m, rng)

            def analyze_records(self, records):
                seen.append(("records", tuple(records)))
                return super().analyze_records(records)

        prover = honest_prover(c5, (0, 1, 0, 1, 2))
        run_protocol(c5, prover, SpyVerifier(), ProtocolConfig(seed=3, rounds=5))
        assert seen
        for kind, payload in seen:
            if kind == "challenge":
                assert isinstance(payload, int)
            else:
                assert all(isinstance(r, ClickRecord) for r in payload)
