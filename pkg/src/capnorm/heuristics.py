"""Monte Carlo model of the Galois filtration under random class and norm draws.

Model CP-1, for a base field with ``#H_K = p^hK`` and ``r`` ramified primes
in a cyclic extension of degree ``p^N``:

* There are ``hK`` class targets. In each filtration round every target still
  alive is hit independently with probability ``1 - 1/p`` (a uniform draw in a
  cyclic factor of order ``p`` is nonzero). ``c_i`` counts targets not hit
  after ``i`` rounds.
* There are ``N(r-1)`` norm slots modelling the Hasse symbols, drawn the same
  way from a separate stream. ``rho_i`` is the analogous count.
* The step ``i -> i+1`` has quotient valuation ``c_i + rho_i`` while
  ``c_i > 0`` and ``0`` afterwards, so ``m`` is the last round in which a class
  target is hit.
* ``e`` is the largest number of class targets hit in a single round, capped
  by ``hK``. The trial capitulates when ``(m, e)`` is smooth.
* Draws are independent across rounds.

Randomness comes from numpy's PCG64. Trial ``t`` lives in block
``t // BLOCK``. Each block seeds its own generator from
``SeedSequence(seed, spawn_key=(block, stream))``, so any partition of the
trial range reproduces the single run exactly. The class stream never
depends on ``N``. This makes capitulation monotone in ``N`` trial by trial.

>>> rep = simulate(SimulationConfig(p=2, N=2, r=1, hK_valuation=0, trials=10, seed=1))
>>> rep.capitulation_frequency
1.0
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CapnormError
from .normpoly import is_smooth
from .padic import is_prime

__all__ = [
    "MODEL_VERSION",
    "BLOCK",
    "HORIZON",
    "SimulationConfig",
    "SimulationReport",
    "simulate",
    "merge_reports",
    "expected_class_count",
    "expected_norm_count",
    "prob_m_at_most",
]

MODEL_VERSION = "CP-1"
BLOCK = 4096
HORIZON = 32
_CLASS_STREAM = 0
_NORM_STREAM = 1


@dataclass(frozen=True)
class SimulationConfig:
    p: int
    N: int
    r: int
    hK_valuation: int
    trials: int
    seed: int
    offset: int = 0
    model_version: str = MODEL_VERSION

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise CapnormError(f"p must be a prime, got {self.p!r}")
        if self.N < 1:
            raise CapnormError("N must be >= 1")
        if self.r < 1:
            raise CapnormError("r must be >= 1")
        if self.hK_valuation < 0:
            raise CapnormError("hK valuation must be >= 0")
        if self.trials < 1:
            raise CapnormError("trials must be >= 1")
        if self.offset < 0:
            raise CapnormError("offset must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise CapnormError("seed must be a 64-bit unsigned integer")
        if self.model_version != MODEL_VERSION:
            raise CapnormError(f"unknown model version {self.model_version!r}")

    @property
    def norm_slots(self) -> int:
        return self.N * (self.r - 1)


@dataclass(frozen=True)
class SimulationReport:
    """Integer tallies over the trial range ``[offset, offset + trials)``.

    ``class_sums[i]`` sums ``c_i`` and ``norm_sums[i]`` sums
    ``rho_i * [c_i > 0]`` over trials, for ``i < HORIZON``.
    """

    config: SimulationConfig
    m_counts: tuple[int, ...]
    capitulations: int
    stable: int
    class_sums: tuple[int, ...]
    norm_sums: tuple[int, ...]
    e_counts: tuple[int, ...] = field(default=())

    @property
    def trials(self) -> int:
        return self.config.trials

    @property
    def capitulation_frequency(self) -> float:
        return self.capitulations / self.trials

    @property
    def stability_frequency(self) -> float:
        return self.stable / self.trials

    @property
    def m_distribution(self) -> dict[int, float]:
        return {m: c / self.trials for m, c in enumerate(self.m_counts) if c}

    def mean_class_factor(self, i: int) -> float:
        return self.class_sums[i] / self.trials

    def mean_norm_factor(self, i: int) -> float:
        return self.norm_sums[i] / self.trials

    def radius(self, freq: float) -> float:
        """3 sigma binomial radius for a frequency estimated on these trials."""
        return 3.0 * math.sqrt(freq * (1.0 - freq) / self.trials)

    def to_dict(self) -> dict:
        c = self.config
        return {
            "format": "capnorm-simulation 1",
            "model_version": c.model_version,
            "assumption": "draws independent across filtration steps",
            "p": c.p,
            "N": c.N,
            "r": c.r,
            "hK_valuation": c.hK_valuation,
            "seed": c.seed,
            "offset": c.offset,
            "trials": c.trials,
            "capitulations": self.capitulations,
            "stable": self.stable,
            "m_counts": list(self.m_counts),
            "e_counts": list(self.e_counts),
            "class_sums": list(self.class_sums),
            "norm_sums": list(self.norm_sums),
        }

    @classmethod
    def from_dict(cls, data: dict) -> SimulationReport:
        config = SimulationConfig(
            p=data["p"], N=data["N"], r=data["r"], hK_valuation=data["hK_valuation"],
            trials=data["trials"], seed=data["seed"], offset=data["offset"],
            model_version=data["model_version"],
        )
        return cls(
            config=config,
            m_counts=tuple(data["m_counts"]),
            capitulations=data["capitulations"],
            stable=data["stable"],
            class_sums=tuple(data["class_sums"]),
            norm_sums=tuple(data["norm_sums"]),
            e_counts=tuple(data["e_counts"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def text(self) -> str:
        c = self.config
        f = self.capitulation_frequency
        lines = [
            f"model {c.model_version} (draws independent across filtration steps)",
            f"p={c.p} N={c.N} r={c.r} v(hK)={c.hK_valuation} seed={c.seed} "
            f"trials={c.trials} offset={c.offset}",
            f"capitulation frequency {f:.6f} +- {self.radius(f):.6f}",
            f"stability frequency {self.stability_frequency:.6f}",
            "m distribution:",
        ]
        for m, q in self.m_distribution.items():
            lines.append(f"  m={m}: {q:.6f}")
        lines.append("step  mean c_i  mean rho_i")
        last = max((i for i in range(HORIZON) if self.class_sums[i] or self.norm_sums[i]),
                   default=0)
        for i in range(min(last + 1, HORIZON)):
            lines.append(f"{i:4d}  {self.mean_class_factor(i):8.5f}  "
                         f"{self.mean_norm_factor(i):10.5f}")
        return "\n".join(lines) + "\n"


def _geometric_rounds(rng: np.random.Generator, p: int, shape: tuple[int, int]) -> np.ndarray:
    # round (1-based) in which a slot is first hit, success probability 1 - 1/p
    return rng.geometric(1.0 - 1.0 / p, size=shape)


def _counts_alive(rounds: np.ndarray) -> np.ndarray:
    """Sum over trials of the number of slots alive after i rounds, i < HORIZON."""
    if rounds.shape[1] == 0:
        return np.zeros(HORIZON, dtype=np.int64)
    steps = np.arange(HORIZON)
    return (rounds[:, :, None] > steps[None, None, :]).sum(axis=(0, 1)).astype(np.int64)


def _pad_add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    n = max(len(a), len(b))
    a = a + (0,) * (n - len(a))
    b = b + (0,) * (n - len(b))
    return tuple(x + y for x, y in zip(a, b))


def _block(config: SimulationConfig, block: int, lo: int, hi: int) -> SimulationReport:
    """Tally trials ``lo..hi`` (indices inside ``block``)."""
    p, hK = config.p, config.hK_valuation
    size = BLOCK
    crng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(config.seed, spawn_key=(block, _CLASS_STREAM))))
    nrng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(config.seed, spawn_key=(block, _NORM_STREAM))))
    hits = _geometric_rounds(crng, p, (size, hK))[lo:hi]
    norm = _geometric_rounds(nrng, p, (size, config.norm_slots))[lo:hi]
    n = hi - lo

    if hK:
        m = hits.max(axis=1)
        top = int(m.max())
        per_round = np.stack([(hits == k).sum(axis=1) for k in range(1, top + 1)], axis=1)
        e = np.minimum(per_round.max(axis=1), hK)
    else:
        m = np.zeros(n, dtype=np.int64)
        e = np.zeros(n, dtype=np.int64)

    # norm factor only contributes while class targets remain
    alive = m[:, None] > np.arange(HORIZON)[None, :]
    class_sums = _counts_alive(hits)
    if norm.shape[1]:
        rho = (norm[:, :, None] > np.arange(HORIZON)[None, None, :]).sum(axis=1)
        norm_sums = (rho * alive).sum(axis=0).astype(np.int64)
    else:
        norm_sums = np.zeros(HORIZON, dtype=np.int64)

    smooth = {}
    caps = 0
    for mv, ev in zip(m.tolist(), e.tolist()):
        key = (mv, ev)
        if key not in smooth:
            smooth[key] = is_smooth(mv, ev, config.N, p)
        caps += smooth[key]

    sub = replace(config, trials=n)
    return SimulationReport(
        config=sub,
        m_counts=tuple(np.bincount(m).tolist()),
        capitulations=caps,
        stable=int((m <= 1).sum()),
        class_sums=tuple(class_sums.tolist()),
        norm_sums=tuple(norm_sums.tolist()),
        e_counts=tuple(np.bincount(e).tolist()),
    )


def simulate(config: SimulationConfig) -> SimulationReport:
    """Run trials ``[config.offset, config.offset + config.trials)`` of model CP-1."""
    start, stop = config.offset, config.offset + config.trials
    total: SimulationReport | None = None
    t = start
    while t < stop:
        block = t // BLOCK
        lo = t - block * BLOCK
        hi = min(BLOCK, stop - block * BLOCK)
        part = _block(config, block, lo, hi)
        total = part if total is None else _add(total, part)
        t = block * BLOCK + hi
    assert total is not None
    return replace(total, config=config)


def _same_model(a: SimulationConfig, b: SimulationConfig) -> bool:
    key = lambda c: (c.p, c.N, c.r, c.hK_valuation, c.seed, c.model_version)  # noqa: E731
    return key(a) == key(b)


def _add(a: SimulationReport, b: SimulationReport) -> SimulationReport:
    config = replace(a.config, trials=a.trials + b.trials, offset=min(a.config.offset, b.config.offset))
    return SimulationReport(
        config=config,
        m_counts=_pad_add(a.m_counts, b.m_counts),
        capitulations=a.capitulations + b.capitulations,
        stable=a.stable + b.stable,
        class_sums=_pad_add(a.class_sums, b.class_sums),
        norm_sums=_pad_add(a.norm_sums, b.norm_sums),
        e_counts=_pad_add(a.e_counts, b.e_counts),
    )


def merge_reports(*reports: SimulationReport) -> SimulationReport:
    """Merge reports over adjacent trial ranges of the same model run.

    Order does not matter; the ranges must tile one interval.
    """
    if not reports:
        raise CapnormError("nothing to merge")
    first = reports[0].config
    for rep in reports[1:]:
        if not _same_model(first, rep.config):
            raise CapnormError("cannot merge reports from different configurations")
    ordered = sorted(reports, key=lambda rep: rep.config.offset)
    total = ordered[0]
    for rep in ordered[1:]:
        if total.config.offset + total.trials != rep.config.offset:
            raise CapnormError("trial ranges are not adjacent")
        total = _add(total, rep)
    return total


def expected_class_count(hK: int, p: int, i: int) -> float:
    """E[c_i] under CP-1."""
    return hK * p ** (-i)


def expected_norm_count(hK: int, N: int, r: int, p: int, i: int) -> float:
    """E[rho_i * 1{c_i > 0}] under CP-1 (class and norm streams are independent)."""
    alive = 1.0 - (1.0 - p ** (-i)) ** hK if i > 0 else (1.0 if hK else 0.0)
    return N * (r - 1) * p ** (-i) * alive


def prob_m_at_most(hK: int, p: int, i: int) -> float:
    """P(m <= i) under CP-1."""
    if hK == 0:
        return 1.0
    return (1.0 - p ** (-i)) ** hK
