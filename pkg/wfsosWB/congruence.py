"""
Randomized congruence checks: bisimilar ground terms must stay bisimilar when
plugged into the same operator context.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.random import Generator
from pandas import DataFrame
from tqdm import tqdm

from wfsosWB._constants import DEFAULT_POOL_SIZE, DEFAULT_SAMPLE_DEPTH, DEFAULT_SEED, DEFAULT_TRIALS, TAU
from wfsosWB._types import Label
from wfsosWB._validate import make_positive_int
from wfsosWB.construct import sample_param, sample_term
from wfsosWB.engine import DerivationBudget, Deriver
from wfsosWB.equiv import coarsest_bisimulation
from wfsosWB.syntax import OpDecl, Term
from wfsosWB.utils import BudgetExhaustedError
from wfsosWB.wfsos import WfsosSpec

Sampler = Callable[[Generator], Term]
Variants = Callable[[Term], Sequence[Term]]

COLUMNS = ["trial", "p", "q", "context", "reflexive", "states", "status"]


@dataclass(frozen=True)
class Counterexample:
    p: Term
    q: Term
    context: Term
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.p} ~ {self.q} but {self.left} !~ {self.right}"


@dataclass
class CongruenceReport:
    """One row per trial in `table`; status is "ok", "counterexample" or "skipped"."""

    table: DataFrame
    counterexamples: List[Counterexample] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    @property
    def skipped(self) -> int:
        return int((self.table["status"] == "skipped").sum())

    @property
    def nontrivial(self) -> int:
        """Trials whose pair was two distinct terms."""
        done = self.table[self.table["status"] != "skipped"]
        return int((~done["reflexive"].astype(bool)).sum())


def bisimilar_terms(spec: WfsosSpec, p: Term, q: Term, budget: Optional[DerivationBudget] = None) -> bool:
    """Whether `p` and `q` are bisimilar in the system explored from both.

    Raises
    ------
    BudgetExhaustedError
        If the exploration is truncated; truncated systems cannot decide the question.
    """
    deriver = Deriver(spec, budget)
    u = deriver.explore([p, q])
    if u.truncated:
        raise BudgetExhaustedError(f"exploration from {p} and {q} was truncated")
    return coarsest_bisimulation(u).same(p, q)


def _context_ops(spec: WfsosSpec) -> List[OpDecl]:
    return [d for d in sorted(spec.sigma, key=lambda d: d.name) if d.arity is None or d.arity > 0]


@dataclass
class _Trial:
    spec: WfsosSpec
    sampler: Sampler
    variants: Optional[Variants]
    budget: DerivationBudget
    labels: Tuple[Label, ...]
    depth: int
    pool: int
    leaves: Tuple[str, ...]

    def partner(self, rng: Generator, p: Term) -> Term:
        candidates: List[Term] = list(self.variants(p)) if self.variants is not None else []
        candidates += [self.sampler(rng) for _ in range(self.pool)]
        candidates = [c for c in candidates if c != p]
        if not candidates:
            return p
        u = Deriver(self.spec, self.budget).explore([p, *candidates])
        if u.truncated:
            return p
        part = coarsest_bisimulation(u)
        for c in candidates:
            if part.same(p, c):
                return c
        return p

    def context(self, rng: Generator) -> Tuple[Term, int]:
        """An operator application with one argument left as the hole #1, and the
        position of that hole."""
        ops = _context_ops(self.spec)
        decl = ops[int(rng.integers(0, len(ops)))]
        n = decl.arity if decl.arity is not None else int(rng.integers(1, 3))
        pos = int(rng.integers(0, n))
        params = tuple(sample_param(rng, k, self.labels, (1, 2)) for k in decl.schema)
        children = [
            Term.hole(1)
            if i == pos
            else sample_term(rng, self.spec.sigma, self.labels, self.depth - 1, leaves=self.leaves)
            for i in range(n)
        ]
        return Term.op(decl.name, *children, params=params), pos

    def run(self, index: int, seed: int) -> Tuple[List[Any], Optional[Counterexample]]:
        rng = np.random.default_rng([seed, index])
        p = self.sampler(rng)
        try:
            q = self.partner(rng, p)
            ctx, pos = self.context(rng)
            left = ctx.replace_child(pos, p)
            right = ctx.replace_child(pos, q)
            deriver = Deriver(self.spec, self.budget)
            u = deriver.explore([left, right])
        except BudgetExhaustedError as e:
            if not self.budget.truncates:
                raise
            warnings.warn(f"Congruence trial {index} skipped: {e}", category=UserWarning)
            return [index, str(p), "", "", True, 0, "skipped"], None
        if u.truncated:
            warnings.warn(f"Congruence trial {index} skipped: exploration truncated", category=UserWarning)
            return [index, str(p), str(q), str(ctx), p == q, len(u), "skipped"], None
        same = coarsest_bisimulation(u).same(left, right)
        row = [index, str(p), str(q), str(ctx), p == q, len(u), "ok" if same else "counterexample"]
        return row, None if same else Counterexample(p, q, ctx, left, right)


def congruence_suite(
    spec: WfsosSpec,
    sampler: Sampler,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    variants: Optional[Variants] = None,
    budget: Optional[DerivationBudget] = None,
    depth: int = DEFAULT_SAMPLE_DEPTH,
    pool: int = DEFAULT_POOL_SIZE,
    leaves: Sequence[str] = (),
    jobs: int = 1,
    show_progress: bool = False,
) -> CongruenceReport:
    """Test that bisimilarity is preserved by the operators of `spec`.

    Each trial draws a ground term p, looks for a distinct bisimilar partner q among
    `variants(p)` and `pool` further samples (falling back to q = p), draws a unary
    context f(..., #1, ...) from the process operators, and checks that f[p] and
    f[q] are bisimilar on their joint explored system.

    Parameters
    ----------
    spec: WfsosSpec
        A validated specification.

    sampler: Callable[[Generator], Term]
        Draws ground terms.

    trials: int
        Number of trials.

    seed: int
        Trial i uses the generator `default_rng([seed, i])`, so results do not depend
        on `jobs`.

    variants: Callable[[Term], Sequence[Term]]
        Terms expected to be bisimilar to their argument (tried first).

    budget: DerivationBudget
        Exploration budget. In truncate mode over-budget trials are skipped with a
        warning, otherwise BudgetExhaustedError propagates.

    jobs: int
        Number of worker threads; rows are reported in trial order.

    show_progress: bool
        Display a tqdm progress bar.

    Returns
    -------
    report: CongruenceReport
        The per-trial table and every counterexample found.
    """
    trials = make_positive_int(trials, "trials")
    jobs = make_positive_int(jobs, "jobs")
    if not _context_ops(spec):
        raise ValueError("The process signature has no operator to build contexts from.")
    trial = _Trial(
        spec,
        sampler,
        variants,
        budget or DerivationBudget(),
        tuple(a for a in spec.labels if a != TAU),
        depth,
        pool,
        tuple(leaves),
    )
    indices = range(trials)
    if jobs == 1:
        results = [trial.run(i, seed) for i in tqdm(indices, disable=not show_progress, desc="congruence")]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool_ex:
            mapped = pool_ex.map(lambda i: trial.run(i, seed), indices)
            results = list(tqdm(mapped, total=trials, disable=not show_progress, desc="congruence"))
    table = pd.DataFrame([row for row, _ in results], columns=COLUMNS)
    found = [cex for _, cex in results if cex is not None]
    return CongruenceReport(table, found)
