"""Commit / measure / unveil / verify cycle for a single trit commitment.

The sender commits by transmitting one of the three signal states; the
receiver measures it immediately (no quantum storage) and keeps only the
six-bit click record.  At unveil time the sender names a state and the
receiver compares the claim against the record.  Under the default policy
the receiver rejects only outcomes that are strictly impossible under the
claim: a vertical click in the claimed state's own branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .optics import (
    ApparatusParams,
    ClickRecord,
    PolarizedState,
    branch_intensities,
    click_probability_tables,
    protocol_state,
    sample_clicks,
)

__all__ = [
    "Claim",
    "VerificationPolicy",
    "commit",
    "measure_commitment",
    "verify_unveil",
    "discriminate_unaided",
    "sample_state_clicks",
    "discriminate_v_clicks",
]


@dataclass(frozen=True)
class Claim:
    """The state index a sender names at unveil time."""

    state_index: int

    def __post_init__(self) -> None:
        if self.state_index not in (0, 1, 2):
            raise ValueError(f"claimed state index must be 0, 1 or 2, got {self.state_index}")


class VerificationPolicy(Enum):
    """How strictly the receiver compares a claim to the click record.

    IMPOSSIBILITY_ONLY rejects only zero-probability events under the claim,
    which keeps an honest sender safe with ideal detectors.  STRICT_HORIZONTAL
    additionally demands a click on every horizontal detector; that matches a
    typical bright-light trace but rejects some honest shots.
    """

    IMPOSSIBILITY_ONLY = "impossibility"
    STRICT_HORIZONTAL = "strict"


def commit(color_index: int, params: ApparatusParams) -> PolarizedState:
    """State committed for a color; colors map one-to-one onto signal states."""
    return protocol_state(color_index, params)


def measure_commitment(
    state: PolarizedState, params: ApparatusParams, rng: np.random.Generator
) -> ClickRecord:
    """Receiver-side measurement of one committed state."""
    return sample_clicks(branch_intensities(state, params), params, rng)


def verify_unveil(
    claim: Claim,
    record: ClickRecord,
    policy: VerificationPolicy = VerificationPolicy.IMPOSSIBILITY_ONLY,
) -> bool:
    """True iff the click record is consistent with the claimed state.

    A vertical click in the claimed branch is impossible for the claimed
    state without dark counts, so it always rejects.
    """
    if record.v_click[claim.state_index]:
        return False
    if policy is VerificationPolicy.STRICT_HORIZONTAL and not all(record.h_click):
        return False
    return True


def discriminate_unaided(record: ClickRecord) -> int | None:
    """Identify the committed state from clicks alone, or None.

    Only certainty counts: a vertical click in branch k rules state k out, so
    identification requires exactly two vertical clicks, leaving a single
    surviving state.  Any other pattern (including all three vertical clicks,
    possible with dark counts or adversarial light) is undetermined.
    """
    v = record.v_click
    if sum(v) == 2:
        return v.index(False)
    return None


def sample_state_clicks(
    indices: np.ndarray,
    params: ApparatusParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched measurement of signal states given by ``indices``.

    Returns boolean click arrays of shape ``indices.shape + (3,)`` for the
    horizontal and vertical detectors.  Same per-detector Bernoulli model as
    :func:`measure_commitment`, via the shared probability tables.
    """
    indices = np.asarray(indices)
    p_h, p_v = click_probability_tables(params)
    u = rng.random(indices.shape + (6,))
    h = u[..., 0:3] < p_h[indices]
    v = u[..., 3:6] < p_v[indices]
    return h, v


def discriminate_v_clicks(v_clicks: np.ndarray) -> np.ndarray:
    """Vectorized twin of :func:`discriminate_unaided`.

    ``v_clicks`` has shape ``(..., 3)``; returns the surviving state index
    where exactly two vertical detectors clicked and -1 elsewhere.
    """
    v_clicks = np.asarray(v_clicks, dtype=bool)
    counts = v_clicks.sum(axis=-1)
    survivor = np.argmin(v_clicks, axis=-1)
    return np.where(counts == 2, survivor, -1)
