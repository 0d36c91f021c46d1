"""Desk-scale simulator for a 3-coloring proof over coherent-state commitments.

The package splits along the protocol's own seams: ``optics`` models the
signal states and the threshold-detector receiver, ``qbc`` the single-trit
commit/unveil cycle, ``analysis`` the closed-form probabilities and cheat
optimization, ``graph`` the 3-coloring machinery, ``protocol`` the round
loop with honest, cheating and curious parties, and ``cli`` the command-line
front end.
"""

from .analysis import (
    CheatReport,
    execution_identification_probability,
    hiding_probability,
    identification_probability,
    lie_escape_probability,
    optimal_cheat_state,
    round_cheat_probability,
    round_identification_probability,
    total_cheat_probability,
)
from .graph import (
    Color,
    DimacsError,
    Graph,
    PERMUTATIONS,
    best_near_coloring,
    brute_force_3color,
    is_valid_3coloring,
    parse_dimacs,
    permute_colors,
    to_dimacs,
)
from .optics import (
    ApparatusParams,
    BranchIntensities,
    ClickRecord,
    PolarizedState,
    branch_intensities,
    click_probability,
    protocol_state,
    sample_clicks,
)
from .protocol import (
    BatchResult,
    Challenge,
    CommitBundle,
    CuriousReport,
    ProtocolConfig,
    ProtocolResult,
    RejectReason,
    RoundTranscript,
    Unveil,
    Verdict,
    cheating_prover,
    curious_verifier,
    honest_prover,
    run_batch,
    run_protocol,
    verifier_check,
)
from .qbc import (
    Claim,
    VerificationPolicy,
    commit,
    discriminate_unaided,
    measure_commitment,
    verify_unveil,
)

__version__ = "0.1.0"
