"""Markov chain over (order, operator string, basis label) configurations.

A configuration C = (n, [b_1..b_n], alpha) carries the signed weight

    W(C) = beta^n / n! * Re <alpha| H_{b_n} ... H_{b_1} |alpha>,

with each H_b the full shifted bond factor coupling*(shift*I + sign*O).
The chain samples |W| and emits sgn(W) so observables can be reweighted.
Configurations with W = 0 are excluded: proposals into them always
reject, keeping the sign well defined.

One sweep runs three update kinds:

  alpha    lazily (probability 1/2 per attempt) flip one uniformly
           chosen label bit, accept min(1, |W'|/|W|)
  string   replace the term at a uniform position by a uniform draw from
           the active term set, accept min(1, |W'|/|W|)
  insert / with probability 1/2 insert a uniform active term at a
  remove   uniform slot (accept min(1, N_act * |W'|/|W|)), otherwise
           remove a uniform operator (accept min(1, |W'| / (N_act*|W|)))

The insert/remove asymmetry factor N_act comes from the proposal
measure: inserting chooses among (n+1)*N_act (slot, term) pairs while
removing chooses among n+1 operators, and the factorial beta^n/n! inside
W supplies the remaining length dependence. Detailed balance with
respect to |W| holds exactly and is enforced by an enumerated
transition-matrix test.

Weight evaluation is a full recomputation per proposal: contract the
string, apply the surviving terms to the prepared basis vector, project.
The sampled configuration always keeps its uncontracted string; the
expansion order n refers to the physical string length.

String lengths are unbounded; there is no truncation anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .contraction import contract
from .estimators import RunAccumulators
from .model import ModelSpec, active_terms
from .statevec import BasisChoice, BasisLabel, string_matrix_element

__all__ = [
    "Configuration",
    "SweepPlan",
    "SweepSample",
    "rng_stream",
    "weight",
    "weight_of",
    "update_alpha",
    "update_string_fixed_n",
    "update_insert_remove",
    "sweep",
    "run_chain",
]


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator; (seed, stream) pairs are independent chains.

    Streams are derived from the master seed by counter through
    SeedSequence spawn keys, so identical (seed, stream) reproduce
    identical chains bit for bit.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


@dataclass
class Configuration:
    """Chain state: basis label, operator string, and cached signed weight."""

    alpha: BasisLabel
    string: list
    weight_value: float

    @property
    def order(self) -> int:
        return len(self.string)

    @classmethod
    def initial(cls, model: ModelSpec, rng: np.random.Generator | None = None) -> "Configuration":
        """Empty-string start; W = 1 for every label, so any alpha is valid."""
        if rng is None:
            bits = (0,) * model.n_sites
        else:
            bits = tuple(int(b) for b in rng.integers(0, 2, size=model.n_sites))
        return cls(alpha=BasisLabel(bits), string=[], weight_value=1.0)


@dataclass(frozen=True)
class SweepPlan:
    """Proposal counts for the three update kinds within one sweep.

    string_updates=None adapts to the current string length (minimum 1
    attempt, and attempts at order 0 are silent no-ops).
    """

    alpha_updates: int
    string_updates: int | None
    insert_remove_updates: int

    def __post_init__(self):
        if self.alpha_updates < 1 or self.insert_remove_updates < 1:
            raise ValueError("update counts must be at least 1")
        if self.string_updates is not None and self.string_updates < 1:
            raise ValueError("update counts must be at least 1")

    @classmethod
    def default(cls, n_sites: int) -> "SweepPlan":
        """N effective label flips (2N lazy attempts), adaptive string
        replacements, N insert/remove attempts."""
        return cls(alpha_updates=2 * n_sites, string_updates=None,
                   insert_remove_updates=n_sites)

    def string_count(self, order: int) -> int:
        if self.string_updates is not None:
            return self.string_updates
        return max(1, order)


@dataclass(frozen=True)
class SweepSample:
    sign: int
    order: int


@lru_cache(maxsize=None)
def _active(model: ModelSpec) -> tuple:
    return tuple(active_terms(model))


def _poisson_factor(beta: float, n: int) -> float:
    """beta^n / n! through logs, safe for any order."""
    if n == 0:
        return 1.0
    return math.exp(n * math.log(beta) - math.lgamma(n + 1))


def weight_of(alpha: BasisLabel, string: list, model: ModelSpec,
              basis: BasisChoice) -> float:
    """Signed weight of an arbitrary (alpha, string) pair."""
    n = len(string)
    if n == 0:
        return 1.0
    reduced = contract(string, model.n_sites)
    me = string_matrix_element(alpha, basis, reduced.terms)
    return _poisson_factor(model.beta, n) * reduced.prefactor * me.real


def weight(config: Configuration, model: ModelSpec, basis: BasisChoice) -> float:
    """Signed weight of a configuration (full evaluation, no caching)."""
    return weight_of(config.alpha, config.string, model, basis)


def metropolis_acceptance(w_old: float, w_new: float) -> float:
    """min(1, |W'|/|W|); zero-weight proposals never accept."""
    if w_new == 0.0:
        return 0.0
    return min(1.0, abs(w_new) / abs(w_old))


def insert_acceptance(w_old: float, w_new: float, n_active: int) -> float:
    if w_new == 0.0:
        return 0.0
    return min(1.0, n_active * abs(w_new) / abs(w_old))


def remove_acceptance(w_old: float, w_new: float, n_active: int) -> float:
    if w_new == 0.0:
        return 0.0
    return min(1.0, abs(w_new) / (n_active * abs(w_old)))


def update_alpha(config: Configuration, model: ModelSpec, basis: BasisChoice,
                 rng: np.random.Generator) -> Configuration:
    """Flip one uniformly chosen label bit, Metropolis on |W|.

    The attempt is lazy: with probability 1/2 it proposes nothing. On
    degenerate weight landscapes (all labels equal, e.g. at order 0)
    every flip is accepted, and a fixed even number of deterministic
    flips per sweep would conserve label parity and cut the chain in
    two; the lazy coin restores aperiodicity without touching detailed
    balance.
    """
    if rng.random() < 0.5:
        return config
    qubit = int(rng.integers(model.n_sites))
    proposal = config.alpha.flip(qubit)
    w_new = weight_of(proposal, config.string, model, basis)
    if rng.random() < metropolis_acceptance(config.weight_value, w_new):
        config.alpha = proposal
        config.weight_value = w_new
    return config


def update_string_fixed_n(config: Configuration, model: ModelSpec,
                          basis: BasisChoice, rng: np.random.Generator) -> Configuration:
    """Replace the term at a uniform position with a uniform active term.

    Silently skipped at order 0. Self-replacements are ratio-1 moves and
    are accepted without a fresh evaluation.
    """
    n = config.order
    if n == 0:
        return config
    terms = _active(model)
    pos = int(rng.integers(n))
    candidate = terms[int(rng.integers(len(terms)))]
    if candidate == config.string[pos]:
        return config
    proposal = list(config.string)
    proposal[pos] = candidate
    w_new = weight_of(config.alpha, proposal, model, basis)
    if rng.random() < metropolis_acceptance(config.weight_value, w_new):
        config.string = proposal
        config.weight_value = w_new
    return config


def update_insert_remove(config: Configuration, model: ModelSpec,
                         basis: BasisChoice, rng: np.random.Generator) -> Configuration:
    """Grow or shrink the string by one operator (n -> n +- 1)."""
    terms = _active(model)
    n_active = len(terms)
    n = config.order
    if rng.random() < 0.5:
        slot = int(rng.integers(n + 1))
        term = terms[int(rng.integers(n_active))]
        proposal = config.string[:slot] + [term] + config.string[slot:]
        w_new = weight_of(config.alpha, proposal, model, basis)
        if rng.random() < insert_acceptance(config.weight_value, w_new, n_active):
            config.string = proposal
            config.weight_value = w_new
    else:
        if n == 0:
            return config
        pos = int(rng.integers(n))
        proposal = config.string[:pos] + config.string[pos + 1:]
        w_new = weight_of(config.alpha, proposal, model, basis)
        if rng.random() < remove_acceptance(config.weight_value, w_new, n_active):
            config.string = proposal
            config.weight_value = w_new
    return config


def sweep(config: Configuration, plan: SweepPlan, model: ModelSpec,
          basis: BasisChoice, rng: np.random.Generator) -> tuple[Configuration, SweepSample]:
    """Run one full sweep and emit (sign, order) of the final state."""
    for _ in range(plan.alpha_updates):
        update_alpha(config, model, basis, rng)
    for _ in range(plan.string_count(config.order)):
        update_string_fixed_n(config, model, basis, rng)
    for _ in range(plan.insert_remove_updates):
        update_insert_remove(config, model, basis, rng)
    sign = 1 if config.weight_value > 0.0 else -1
    return config, SweepSample(sign=sign, order=config.order)


def run_chain(model: ModelSpec, basis: BasisChoice, plan: SweepPlan,
              rng: np.random.Generator, sweeps: int, warmup_sweeps: int,
              n_bins: int = 20) -> tuple[RunAccumulators, Configuration]:
    """Drive one chain for `sweeps` sweeps, accumulating after warmup.

    Each chain owns its configuration and accumulator; independent
    chains with distinct rng streams can run concurrently and merge
    their accumulators afterwards.
    """
    if warmup_sweeps >= sweeps:
        raise ValueError(f"warmup ({warmup_sweeps}) must be below sweeps ({sweeps})")
    config = Configuration.initial(model, rng)
    acc = RunAccumulators(n_bins=n_bins, expected_samples=sweeps - warmup_sweeps)
    for i in range(sweeps):
        config, sample = sweep(config, plan, model, basis, rng)
        if i >= warmup_sweeps:
            acc.add(sample.sign, sample.order)
    return acc, config
