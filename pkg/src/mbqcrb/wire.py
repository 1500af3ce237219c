"""Logical-level simulation of a noisy linear cluster wire.

Each site measurement applies X^m H Z_theta to the logical qubit, with the
outcome m sampled at a configurable, state-independent bias. Noise enters as
a configurable logical channel after each step or after each fixed-size gate
block; physical preparation/entangling/measurement errors are represented
only through that effective channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .channels import (
    Channel,
    Effect,
    H,
    State,
    Unitary2,
    X,
    Y,
    Z,
    amplitude_damping,
    apply,
    channel_from_unitary,
    compose,
    dephasing,
    depolarizing,
    identity_channel,
    measure,
    projector_effect,
    z_rotation,
    I2,
)
from .gatesets import angles_to_clifford, byproduct_bits

AFTER_EACH_STEP = "after-each-step"
AFTER_EACH_GATE_BLOCK = "after-each-gate-block"

NOISE_KINDS = (
    "none",
    "depolarizing",
    "dephasing",
    "amplitude-damping",
    "unitary-overrotation",
    "composite",
)


@dataclass(frozen=True)
class NoiseModel:
    """Per-step (or per-block) logical noise on the wire.

    ``strength`` is the retention parameter for depolarizing, the flip
    probability for dephasing, the decay probability for amplitude damping,
    and the overrotation angle (radians, about Z) for unitary-overrotation.
    ``dependence``, when set, receives the step angle and outcome (or the
    block's angle and outcome tuples, for block placement) and returns the
    NoiseModel or Channel to apply there instead.
    """

    kind: str = "none"
    strength: float = 0.0
    placement: str = AFTER_EACH_GATE_BLOCK
    dependence: Optional[Callable[[object, object], Union["NoiseModel", Channel]]] = None
    parts: tuple["NoiseModel", ...] = ()

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.placement not in (AFTER_EACH_STEP, AFTER_EACH_GATE_BLOCK):
            raise ValueError(f"unknown noise placement {self.placement!r}")
        if self.kind == "composite" and not self.parts:
            raise ValueError("composite noise requires parts")

    @property
    def trivial(self) -> bool:
        return self.kind == "none" and self.dependence is None

    def base_channel(self) -> Channel:
        return _base_channel(self)

    def realize(self, theta=None, outcome=None) -> Channel:
        """Channel to apply at a step (or block) with the given context."""
        if self.dependence is not None:
            resolved = self.dependence(theta, outcome)
            if isinstance(resolved, Channel):
                return resolved
            return resolved.base_channel()
        return self.base_channel()


@lru_cache(maxsize=256)
def _base_channel(noise: "NoiseModel") -> Channel:
    if noise.kind == "none":
        return identity_channel()
    if noise.kind == "depolarizing":
        return depolarizing(noise.strength)
    if noise.kind == "dephasing":
        return dephasing(noise.strength)
    if noise.kind == "amplitude-damping":
        return amplitude_damping(noise.strength)
    if noise.kind == "unitary-overrotation":
        return channel_from_unitary(z_rotation(noise.strength))
    ch = identity_channel()
    for part in noise.parts:
        ch = compose(part.base_channel(), ch)
    return ch


NO_NOISE = NoiseModel()


@dataclass(frozen=True)
class InstrumentConfig:
    """Measurement-outcome statistics: P(m = 1) = 1/2 + bias.

    With ``inject_randomness`` every outcome is XORed with a fresh fair coin
    and the flip is folded into the step deterministically, which restores a
    uniform effective outcome distribution.
    """

    bias: float = 0.0
    inject_randomness: bool = False

    def __post_init__(self):
        if not -0.5 <= self.bias <= 0.5:
            raise ValueError(f"bias must lie in [-1/2, 1/2], got {self.bias}")


@dataclass
class WireRun:
    """State of one wire execution: logical qubit, outcomes, coins, frame."""

    state: State
    outcomes: list[int] = field(default_factory=list)
    injected: list[int] = field(default_factory=list)
    pauli_frame: tuple[int, int] = (0, 0)
    seed: object = None


def step_unitary(theta: float, m: int) -> Unitary2:
    """Logical gate X^m H Z_theta applied by one wire measurement."""
    u = H.matrix @ z_rotation(theta).matrix
    if m:
        u = X.matrix @ u
    return Unitary2(u)


@lru_cache(maxsize=512)
def _step_channel(theta: float, m: int) -> Channel:
    return channel_from_unitary(step_unitary(theta, m))


def block_unitary(angles, outcomes) -> Unitary2:
    """Gate applied by a block of measurements, first angle acting first."""
    m = np.eye(2, dtype=complex)
    for theta, out in zip(angles, outcomes):
        m = step_unitary(theta, out).matrix @ m
    return Unitary2(m)


def measure_step(
    run: WireRun,
    theta: float,
    noise: NoiseModel = NO_NOISE,
    instrument: InstrumentConfig = InstrumentConfig(),
    rng: np.random.Generator | None = None,
) -> tuple[WireRun, int]:
    """Measure one wire site at angle ``theta`` and advance the logical state.

    Samples the raw outcome at the instrument's bias, XORs in a fair coin
    when randomness injection is enabled (the flip amounts to relabeling the
    measurement axes, so the effective outcome drives the applied gate), and
    applies per-step noise. Returns the run and the effective outcome.
    """
    if rng is None:
        raise ValueError("an explicit random generator is required")
    m = int(rng.random() < 0.5 + instrument.bias)
    if instrument.inject_randomness:
        coin = int(rng.random() < 0.5)
        run.injected.append(coin)
        m ^= coin
    run.state = apply(_step_channel(float(theta), m), run.state)
    if not noise.trivial and noise.placement == AFTER_EACH_STEP:
        run.state = apply(noise.realize(theta, m), run.state)
    run.outcomes.append(m)
    return run, m


def run_gate_block(
    run: WireRun,
    angles,
    noise: NoiseModel = NO_NOISE,
    instrument: InstrumentConfig = InstrumentConfig(),
    rng: np.random.Generator | None = None,
) -> tuple[WireRun, list[int]]:
    """Execute one gate block of measurements at the given angles.

    Block-placed noise is applied once after the block's ideal steps. For
    three-step blocks at quarter-turn angles, the run's Pauli frame is
    advanced automatically.
    """
    angles = list(angles)
    if len(angles) < 1:
        raise ValueError("a gate block needs at least one measurement")
    outcomes = []
    for theta in angles:
        _, m = measure_step(run, theta, noise, instrument, rng)
        outcomes.append(m)
    if not noise.trivial and noise.placement == AFTER_EACH_GATE_BLOCK:
        run.state = apply(noise.realize(tuple(angles), tuple(outcomes)), run.state)
    if len(angles) == 3:
        quads = [a / (np.pi / 2) for a in angles]
        if all(abs(q - round(q)) < 1e-9 for q in quads):
            n = tuple(int(round(q)) % 4 for q in quads)
            run.pauli_frame = update_pauli_frame(run.pauli_frame, n, tuple(outcomes))
    return run, outcomes


_PAULI_BITS = {(1, 0): X, (1, 1): Y, (0, 1): Z}


def conjugation_bits(u: Unitary2) -> np.ndarray:
    """GF(2) action of frame conjugation by a Clifford ``u``.

    Returns the 2x2 bit matrix A with u X^fx Z^fz u^dag = X^fx' Z^fz' up to
    phase, (fx', fz') = A (fx, fz).
    """
    cols = []
    for w in (X, Z):
        conj = Unitary2(u.matrix @ w.matrix @ u.matrix.conj().T)
        for bits, pauli in _PAULI_BITS.items():
            if conj.equals_up_to_phase(pauli):
                cols.append(bits)
                break
        else:
            raise ValueError("unitary does not normalize the Pauli group")
    return np.array(cols, dtype=int).T


@lru_cache(maxsize=None)
def _clifford_frame_action(n: tuple[int, int, int]) -> np.ndarray:
    u = angles_to_clifford(tuple(k * np.pi / 2 for k in n))
    return conjugation_bits(u)


def update_pauli_frame(frame, n, m) -> tuple[int, int]:
    """Fold one Clifford block's byproducts into an existing Pauli frame.

    The old frame is conjugated through the block's all-zeros gate and the
    block's own byproduct bits are XORed on top.
    """
    fx, fz = (int(b) for b in frame)
    if fx not in (0, 1) or fz not in (0, 1):
        raise ValueError("frame entries must be bits")
    n = tuple(int(k) for k in n)
    b1, b2 = byproduct_bits(n, m)
    a = _clifford_frame_action(n)
    fx_new = (b1 + a[0, 0] * fx + a[0, 1] * fz) % 2
    fz_new = (b2 + a[1, 0] * fx + a[1, 1] * fz) % 2
    return int(fx_new), int(fz_new)


def frame_unitary(frame) -> Unitary2:
    """The Pauli X^fx Z^fz recorded in a frame."""
    fx, fz = frame
    m = np.eye(2, dtype=complex)
    if fz:
        m = Z.matrix @ m
    if fx:
        m = X.matrix @ m
    return Unitary2(m)


def final_measurement(
    run: WireRun,
    basis: Unitary2 = I2,
    noise_inv: NoiseModel = NO_NOISE,
    rng: np.random.Generator | None = None,
    effect: Effect | None = None,
) -> int:
    """Sample the terminal X-basis measurement; 1 means survival.

    The basis rotation absorbs the sequence inverse and any Pauli frame, and
    is applied before the inverse-step noise so that the noisy inverse
    decomposes as noise after the ideal rotation.
    """
    if rng is None:
        raise ValueError("an explicit random generator is required")
    p = survival_probability(run, basis, noise_inv, effect)
    return int(rng.random() < p)


@lru_cache(maxsize=1)
def _plus_effect() -> Effect:
    return projector_effect(I2)


def survival_probability(
    run: WireRun,
    basis: Unitary2 = I2,
    noise_inv: NoiseModel = NO_NOISE,
    effect: Effect | None = None,
) -> float:
    """Exact Born probability that :func:`final_measurement` returns 1."""
    if basis is I2:
        state = run.state
    else:
        state = apply(channel_from_unitary(basis), run.state)
    if not noise_inv.trivial:
        state = apply(noise_inv.realize(), state)
    if effect is None:
        effect = _plus_effect()
    return measure(effect, state)
