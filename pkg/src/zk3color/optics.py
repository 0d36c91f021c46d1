"""Polarized coherent states and the three-branch threshold-detector receiver.

The signal set lives on a fixed-energy circle in the (horizontal, vertical)
field plane: three states at angles phi, phi+theta, phi+2*theta.  The
receiver splits the light into three branches, rotates branch k back by
-(phi + k*theta), and separates the result on a polarizing splitter feeding
two threshold detectors.  A state that matches branch k puts strictly zero
light on that branch's vertical detector; every mismatch leaves a sin^2 of
the angular distance.  Coherent light stays coherent through linear optics,
so every detector sees an independent Poissonian beam and clicks with
probability 1 - exp(-mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ApparatusParams",
    "PolarizedState",
    "BranchIntensities",
    "ClickRecord",
    "protocol_state",
    "branch_intensities",
    "click_probability",
    "sample_clicks",
    "click_probability_tables",
]

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ApparatusParams:
    """Signal and receiver settings shared by both parties.

    Angles are radians.  ``mean_photon`` is the energy of every signal state
    (amplitude squared).  ``branch_weights`` are the splitter fractions
    feeding the three analysis branches and must sum to 1.  ``efficiency``
    scales every detector's mean photon number; ``dark_rate`` adds a constant
    mean count to every detector on every shot.
    """

    phi: float = math.pi / 6.7
    theta: float = math.pi / 10
    mean_photon: float = 20.0
    branch_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    efficiency: float = 1.0
    dark_rate: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.phi) and math.isfinite(self.theta)):
            raise ValueError("phi and theta must be finite")
        if not (math.isfinite(self.mean_photon) and self.mean_photon >= 0):
            raise ValueError(f"mean_photon must be >= 0, got {self.mean_photon}")
        weights = tuple(float(w) for w in self.branch_weights)
        if len(weights) != 3:
            raise ValueError("branch_weights must have exactly 3 entries")
        if any(w < 0 for w in weights):
            raise ValueError(f"branch_weights must be >= 0, got {weights}")
        if abs(sum(weights) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"branch_weights must sum to 1, got sum {sum(weights)!r}")
        object.__setattr__(self, "branch_weights", weights)
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in [0, 1], got {self.efficiency}")
        if not (math.isfinite(self.dark_rate) and self.dark_rate >= 0):
            raise ValueError(f"dark_rate must be >= 0, got {self.dark_rate}")

    def branch_angle(self, k: int) -> float:
        """Rotation angle undone by branch k (also the angle of signal k)."""
        return self.phi + k * self.theta

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.mean_photon)


@dataclass(frozen=True)
class PolarizedState:
    """Two-mode coherent state given by its real field amplitudes.

    ``angle`` records the polar angle when the state was built on the energy
    circle (see :meth:`from_angle`).  Keeping the construction angle lets the
    receiver rotate by an exact angle difference, so a branch matched to the
    state nulls its vertical port identically instead of within rounding.
    """

    h_amp: float
    v_amp: float
    angle: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h_amp) and math.isfinite(self.v_amp)):
            raise ValueError("amplitudes must be finite")

    @classmethod
    def from_angle(cls, magnitude: float, angle: float) -> "PolarizedState":
        if magnitude < 0:
            raise ValueError(f"magnitude must be >= 0, got {magnitude}")
        return cls(magnitude * math.cos(angle), magnitude * math.sin(angle), angle)

    @property
    def total_photons(self) -> float:
        return self.h_amp * self.h_amp + self.v_amp * self.v_amp


@dataclass(frozen=True)
class BranchIntensities:
    """Mean photon numbers at the six detectors, indexed by branch."""

    mu_h: tuple[float, float, float]
    mu_v: tuple[float, float, float]

    def total(self) -> float:
        return sum(self.mu_h) + sum(self.mu_v)


@dataclass(frozen=True)
class ClickRecord:
    """Click/no-click outcome of all six detectors for one shot."""

    h_click: tuple[bool, bool, bool]
    v_click: tuple[bool, bool, bool]


def protocol_state(k: int, params: ApparatusParams) -> PolarizedState:
    """Signal state number k: amplitude sqrt(mean_photon) at angle phi + k*theta."""
    if k not in (0, 1, 2):
        raise ValueError(f"state index must be 0, 1 or 2, got {k}")
    return PolarizedState.from_angle(params.amplitude, params.branch_angle(k))


def branch_intensities(state: PolarizedState, params: ApparatusParams) -> BranchIntensities:
    """Mean photon numbers after splitting, branch rotation and the PBS.

    Branch k receives a ``branch_weights[k]`` share of the light, rotated by
    -(phi + k*theta): the horizontal port gets cos^2 and the vertical port
    sin^2 of the angle between the state and the branch, times the state
    energy and the detector efficiency.
    """
    energy = state.total_photons
    gamma = state.angle if state.angle is not None else math.atan2(state.v_amp, state.h_amp)
    mu_h = []
    mu_v = []
    for k in range(3):
        delta = gamma - params.branch_angle(k)
        scale = params.efficiency * params.branch_weights[k] * energy
        c = math.cos(delta)
        s = math.sin(delta)
        mu_h.append(scale * c * c)
        mu_v.append(scale * s * s)
    return BranchIntensities(mu_h=tuple(mu_h), mu_v=tuple(mu_v))


def click_probability(mu: float, dark_rate: float = 0.0) -> float:
    """Threshold-detector click probability 1 - exp(-(mu + dark_rate))."""
    if mu < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mu}")
    if dark_rate < 0:
        raise ValueError(f"dark_rate must be >= 0, got {dark_rate}")
    return -math.expm1(-(mu + dark_rate))


def sample_clicks(
    intensities: BranchIntensities,
    params: ApparatusParams,
    rng: np.random.Generator,
) -> ClickRecord:
    """Draw one shot: six independent Bernoulli clicks.

    Independence across detectors is exact for coherent light split on linear
    optics.  Consumes six uniforms in the order h0, h1, h2, v0, v1, v2.
    """
    u = rng.random(6)
    d = params.dark_rate
    h = tuple(bool(u[k] < click_probability(intensities.mu_h[k], d)) for k in range(3))
    v = tuple(bool(u[3 + k] < click_probability(intensities.mu_v[k], d)) for k in range(3))
    return ClickRecord(h_click=h, v_click=v)


def click_probability_tables(params: ApparatusParams) -> tuple[np.ndarray, np.ndarray]:
    """Per-detector click probabilities for the three signal states.

    Returns two (3, 3) arrays (horizontal, vertical); entry [j, k] is the
    click probability of branch k's detector when state j was sent.  Built
    from the same state/intensity pipeline as the scalar path, so batched
    samplers drawing ``uniform < table`` reproduce :func:`sample_clicks`
    statistics exactly.
    """
    p_h = np.empty((3, 3))
    p_v = np.empty((3, 3))
    for j in range(3):
        mu = branch_intensities(protocol_state(j, params), params)
        for k in range(3):
            p_h[j, k] = click_probability(mu.mu_h[k], params.dark_rate)
            p_v[j, k] = click_probability(mu.mu_v[k], params.dark_rate)
    return p_h, p_v
