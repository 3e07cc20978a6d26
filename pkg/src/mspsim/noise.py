"""Circuit-level Pauli noise model: channel tables, seeded sampling, twirling.

Channels follow the uniform strength-p model: init errors (X after |0>,
Z after |+>, Y after |H>, Z after |T>), single/two-qubit depolarizing after
gates, merged idle windows with the closed-form rate

    p_n = (3/4) * (1 - (1 - 4p/3)^n),

and X (Z) flips before Z-basis (X-basis) measurement.  Sampling is
counter-based (Philox streams keyed by master seed, with the shot index in
the counter block) so results are independent of worker scheduling.

Data-frame locations of circuits that carry an encoder are sampled by
drawing the encoder's internal circuit-level errors and propagating them
through the (Clifford) encoder to an end-of-encoder Pauli frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString
from .circuit import Channel, ProtocolCircuit, ProtocolGate, GateKind, _grid_locations
from .clifford import conjugate_by_named_gate, is_psc as _is_psc

_LETTER_XZ = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def idle_compose(p: float, n: int) -> float:
    """Effective depolarizing rate of n consecutive idling steps."""
    if n < 1:
        raise ValueError("idle window must contain at least one step")
    return 0.75 * (1.0 - (1.0 - 4.0 * p / 3.0) ** n)


def trivial_fraction(p: float, m: int) -> float:
    """Expected fraction of shots with a non-trivial error configuration."""
    if not (0.0 <= p <= 1.0) or m < 0:
        raise ValueError("need p in [0,1] and M >= 0")
    return 1.0 - (1.0 - p) ** m


class NoiseModel:
    """Uniform strength-p circuit noise with optional per-channel overrides.

    Overrides map a channel tag to {letter: probability}, e.g.
    {"init_magic_h": {"Y": 0.01}, "depol1": {}} (empty dict disables).
    """

    def __init__(self, p: float, overrides: dict | None = None):
        if not (0.0 <= p < 1.0):
            raise ValueError("p must lie in [0, 1)")
        self.p = p
        self.overrides = {Channel(k): dict(v) for k, v in (overrides or {}).items()}

    @staticmethod
    def from_json(text: str) -> "NoiseModel":
        d = json.loads(text)
        return NoiseModel(float(d["p"]), d.get("overrides"))

    def single_qubit_table(self, channel: Channel, steps: int = 1) -> list[tuple[str, float]]:
        """(letter, prob) rows for every 1-qubit channel tag."""
        if channel in self.overrides:
            return [(k, float(v)) for k, v in self.overrides[channel].items() if v > 0]
        p = self.p
        if channel is Channel.INIT0 or channel is Channel.MEAS_Z:
            return [("X", p)] if p else []
        if channel is Channel.INIT_PLUS or channel is Channel.MEAS_X:
            return [("Z", p)] if p else []
        if channel is Channel.INIT_MAGIC_H:
            return [("Y", p)] if p else []
        if channel is Channel.INIT_MAGIC_T:
            return [("Z", p)] if p else []
        if channel is Channel.DEPOL1 or channel is Channel.DATA_FRAME:
            return [(l, p / 3.0) for l in "XYZ"] if p else []
        if channel is Channel.IDLE:
            pn = idle_compose(p, steps)
            return [(l, pn / 3.0) for l in "XYZ"] if pn else []
        raise ValueError(f"{channel} is not a single-qubit channel")

    def depol2_rate(self) -> float:
        if Channel.DEPOL2 in self.overrides:
            return float(sum(self.overrides[Channel.DEPOL2].values()))
        return self.p

    def channel_total(self, channel: Channel, steps: int = 1) -> float:
        if channel is Channel.DEPOL2:
            return self.depol2_rate()
        return float(sum(pr for _, pr in self.single_qubit_table(channel, steps)))


_DEPOL2_OUTCOMES = [
    (a, b) for a in ("_", "X", "Y", "Z") for b in ("_", "X", "Y", "Z")
    if not (a == "_" and b == "_")
]


@dataclass
class ErrorConfig:
    """Per-location sampled single-qubit Pauli components (x, z bit arrays)."""

    m: int
    x: np.ndarray
    z: np.ndarray

    @property
    def trivial(self) -> bool:
        return not (self.x.any() or self.z.any())

    def pauli_at(self, index: int) -> PauliString:
        xb, zb = int(self.x[index]), int(self.z[index])
        return PauliString(1, xb, zb, xb & zb)

    def bits(self, label: int) -> tuple[int, int]:
        """(a, b) = (X, Z) exponents of the location with the given label."""
        return int(self.x[label - 1]), int(self.z[label - 1])

    @staticmethod
    def zeros(m: int) -> "ErrorConfig":
        return ErrorConfig(m, np.zeros(m, dtype=np.uint8), np.zeros(m, dtype=np.uint8))

    @staticmethod
    def from_bits(m: int, assignments: dict[int, tuple[int, int]]) -> "ErrorConfig":
        """Build a config from {label: (a, b)} assignments."""
        cfg = ErrorConfig.zeros(m)
        for label, (a, b) in assignments.items():
            cfg.x[label - 1] = a & 1
            cfg.z[label - 1] = b & 1
        return cfg


def shot_rng(seed: int, shot_index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based per-shot stream; identical across worker schedules."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    counter = np.array([shot_index & 0xFFFFFFFFFFFFFFFF, 0, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def encoder_internal_locations(circ: ProtocolCircuit):
    """Virtual grid of the noiseless encoder: init + gate + idle locations."""
    enc = circ.encoder
    n = circ.n_data
    gates = [ProtocolGate(GateKind.CLIFFORD, i + 1, qubits=tuple(q), name=name)
             for i, (name, q) in enumerate(enc.gates)]
    init_channels = {}
    for q in range(n):
        init_channels[q] = Channel.INIT0
    for wire, tag in zip(enc.carriers, enc.carrier_tags):
        init_channels[wire] = (Channel.INIT_MAGIC_H if tag == "magic_h"
                               else Channel.INIT_MAGIC_T)
    return gates, _grid_locations(n, gates, init_channels, {}, False)


class CompiledSampler:
    """Pre-resolved elementary draws for one (model, circuit) pair.

    Each draw has a cumulative-probability row and, per outcome, a list of
    (location index, x, z) bit contributions; encoder-internal draws
    contribute their propagated frame bits to the data-frame locations.
    """

    def __init__(self, model: NoiseModel, circuit: ProtocolCircuit):
        self.model = model
        self.circuit = circuit
        self.m = circuit.num_locations
        draws: list[tuple[list[float], list[list[tuple[int, int, int]]]]] = []

        frame_loc_of_wire = {}
        for loc in circuit.locations:
            if loc.channel is Channel.DATA_FRAME:
                frame_loc_of_wire[loc.qubit] = loc.index

        has_encoder = circuit.encoder is not None
        for loc in circuit.locations:
            if loc.channel is Channel.DATA_FRAME and has_encoder:
                continue  # filled by the encoder reduction below
            if loc.channel is Channel.DEPOL2:
                if loc.pair_role == 1:
                    continue
                rate = model.depol2_rate()
                if rate <= 0:
                    continue
                probs, outs = [], []
                for a, b in _DEPOL2_OUTCOMES:
                    probs.append(rate / 15.0)
                    eff = []
                    if a != "_":
                        xb, zb = _LETTER_XZ[a]
                        eff.append((loc.index, xb, zb))
                    if b != "_":
                        xb, zb = _LETTER_XZ[b]
                        eff.append((loc.pair_partner, xb, zb))
                    outs.append(eff)
                draws.append((np.cumsum(probs).tolist(), outs))
            else:
                table = model.single_qubit_table(loc.channel, loc.steps)
                if not table:
                    continue
                probs = [pr for _, pr in table]
                outs = []
                for letter, _ in table:
                    xb, zb = _LETTER_XZ[letter]
                    outs.append([(loc.index, xb, zb)])
                draws.append((np.cumsum(probs).tolist(), outs))

        self._enc_draw_start = len(draws)
        if has_encoder:
            gates, enc_locs = encoder_internal_locations(circuit)
            n = circuit.n_data
            for eloc in enc_locs:
                downstream = [g for g in gates if g.time_step >= eloc.column]
                masks = {}
                for letter in ("X", "Z"):
                    p = PauliString.single(n, eloc.qubit, letter)
                    for g in downstream:
                        p = g.conjugate_pauli(p)
                    masks[letter] = (p.x, p.z)

                def frame_effect(xb, zb):
                    fx = (masks["X"][0] * xb) ^ (masks["Z"][0] * zb)
                    fz = (masks["X"][1] * xb) ^ (masks["Z"][1] * zb)
                    eff = []
                    for w, idx in frame_loc_of_wire.items():
                        bx, bz = (fx >> w) & 1, (fz >> w) & 1
                        if bx or bz:
                            eff.append((idx, bx, bz))
                    return eff

                if eloc.channel is Channel.DEPOL2:
                    if eloc.pair_role == 1:
                        continue
                    rate = model.depol2_rate()
                    if rate <= 0:
                        continue
                    partner = enc_locs[eloc.pair_partner]
                    pmask = {}
                    for letter in ("X", "Z"):
                        p = PauliString.single(n, partner.qubit, letter)
                        for g in [g for g in gates if g.time_step >= partner.column]:
                            p = g.conjugate_pauli(p)
                        pmask[letter] = (p.x, p.z)
                    probs, outs = [], []
                    for a, b in _DEPOL2_OUTCOMES:
                        probs.append(rate / 15.0)
                        fx = fz = 0
                        if a != "_":
                            xb, zb = _LETTER_XZ[a]
                            fx ^= (masks["X"][0] * xb) ^ (masks["Z"][0] * zb)
                            fz ^= (masks["X"][1] * xb) ^ (masks["Z"][1] * zb)
                        if b != "_":
                            xb, zb = _LETTER_XZ[b]
                            fx ^= (pmask["X"][0] * xb) ^ (pmask["Z"][0] * zb)
                            fz ^= (pmask["X"][1] * xb) ^ (pmask["Z"][1] * zb)
                        eff = []
                        for w, idx in frame_loc_of_wire.items():
                            bx, bz = (fx >> w) & 1, (fz >> w) & 1
                            if bx or bz:
                                eff.append((idx, bx, bz))
                        outs.append(eff)
                    draws.append((np.cumsum(probs).tolist(), outs))
                else:
                    table = model.single_qubit_table(eloc.channel, eloc.steps)
                    if not table:
                        continue
                    probs, outs = [], []
                    for letter, pr in table:
                        xb, zb = _LETTER_XZ[letter]
                        probs.append(pr)
                        outs.append(frame_effect(xb, zb))
                    draws.append((np.cumsum(probs).tolist(), outs))

        self.draws = draws
        self.n_draws = len(draws)
        self._totals = np.array([d[0][-1] for d in draws]) if draws else np.zeros(0)

    def sample(self, rng: np.random.Generator) -> ErrorConfig:
        cfg = ErrorConfig.zeros(self.m)
        if self.n_draws == 0:
            return cfg
        u = rng.random(self.n_draws)
        hits = np.flatnonzero(u < self._totals)
        for d in hits:
            cum, outs = self.draws[d]
            k = int(np.searchsorted(cum, u[d], side="right"))
            if k >= len(outs):
                continue
            for idx, xb, zb in outs[k]:
                cfg.x[idx] ^= xb
                cfg.z[idx] ^= zb
        return cfg

    def trivial_probability(self) -> float:
        """Exact probability of an all-identity configuration.

        Encoder-internal draws may cancel to an identity frame; that part is
        handled by exact convolution over the frame group.
        """
        p_no = 1.0
        frame_draws = []
        for d, (cum, outs) in enumerate(self.draws):
            if d >= self._enc_draw_start:
                frame_draws.append((cum, outs))
            else:
                p_no *= 1.0 - cum[-1]
        if frame_draws:
            nd = self.circuit.n_data
            size = 1 << (2 * nd)
            dist = np.zeros(size)
            dist[0] = 1.0
            idx = np.arange(size)
            for cum, outs in frame_draws:
                probs = np.diff([0.0] + list(cum))
                new = (1.0 - cum[-1]) * dist
                for pr, eff in zip(probs, outs):
                    key = 0
                    for loc_idx, xb, zb in eff:
                        w = self.circuit.locations[loc_idx].qubit
                        key ^= (xb << w) | (zb << (nd + w))
                    new += pr * dist[idx ^ key]
                dist = new
            p_no *= dist[0]
        return 1.0 - p_no


_SAMPLER_CACHE: dict[tuple[int, int], CompiledSampler] = {}


def get_sampler(model: NoiseModel, circuit: ProtocolCircuit) -> CompiledSampler:
    key = (id(model), id(circuit))
    sampler = _SAMPLER_CACHE.get(key)
    if sampler is None or sampler.model is not model or sampler.circuit is not circuit:
        sampler = CompiledSampler(model, circuit)
        _SAMPLER_CACHE[key] = sampler
    return sampler


def sample_config(model: NoiseModel, circuit: ProtocolCircuit, seed: int,
                  shot_index: int) -> ErrorConfig:
    """Independent per-location draw, deterministic in (seed, shot_index)."""
    sampler = get_sampler(model, circuit)
    return sampler.sample(shot_rng(seed, shot_index, stream=0))


# ---------------------------------------------------------------------------
# twirling (Appendix-A propositions, dense)
# ---------------------------------------------------------------------------

def twirl_check(rho: np.ndarray, stabilizing) -> np.ndarray:
    """Apply the twirling map of a stabilizing PSC (or PSC group) to rho.

    `stabilizing` is a dense unitary, a list of dense unitaries (group
    generators), or a PscForm.  Each generator must be a PSC; the generated
    group is averaged over.  Dense, capped at 3 qubits.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if n > 3:
        raise ValueError("twirl_check capped at 3 qubits")
    if hasattr(stabilizing, "reconstruct"):
        generators = [stabilizing.reconstruct()]
    elif isinstance(stabilizing, np.ndarray):
        generators = [stabilizing]
    else:
        generators = [np.asarray(g, dtype=complex) for g in stabilizing]
    for g in generators:
        if g.shape != (dim, dim):
            raise ValueError("stabilizer dimension mismatch")
        if not _is_psc(g):
            raise ValueError("stabilizing input is not a PSC")
    group = [np.eye(dim, dtype=complex)]
    frontier = [np.eye(dim, dtype=complex)]
    while frontier:
        nxt = []
        for el in frontier:
            for g in generators:
                cand = g @ el
                if not any(np.allclose(cand, h, atol=1e-9) or
                           np.allclose(cand, -h, atol=1e-9) or
                           np.allclose(cand, 1j * h, atol=1e-9) or
                           np.allclose(cand, -1j * h, atol=1e-9) for h in group):
                    group.append(cand)
                    nxt.append(cand)
        frontier = nxt
        if len(group) > 64:
            raise ValueError("stabilizing set does not generate a small group")
    out = np.zeros_like(rho)
    for s in group:
        out += s @ rho @ s.conj().T
    return out / len(group)
