"""Time-stepped citation network growth with competitive attractiveness.

Each 5-year step creates the scheduled number of cases, then assigns the
scheduled number of citations, each citation choosing a case with
probability proportional to exp(linear predictor). Covariates are frozen
at their start-of-step values, so preferential attachment acts with a
one-step lag.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from abcnet.sumstats import StatVector
from abcnet.table import SimTable
from abcnet.kde import scott_factor

CITATION_STAT_NAMES = ["sd_total_cites", "p_cold", "g_corp", "g_crown", "g_dissent"]

ATTRACT_PARAM_NAMES = ["b_irrel", "b_pa", "b_corp", "b_crown", "b_dissent"]

# exp() overflow guard for the linear predictor
EXP_CLAMP = 700.0


@dataclass(frozen=True)
class AttractParams:
    b_irrel: float
    b_pa: float
    b_corp: float
    b_crown: float
    b_dissent: float

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")


@dataclass
class CaseTable:
    """Per-step schedule: case creations, citations, attribute rates."""

    periods: list[str]
    cases: np.ndarray          # (T,) int
    cites: np.ndarray          # (T,) int
    p_corp: np.ndarray
    p_crown: np.ndarray
    p_dissent: np.ndarray

    def __post_init__(self):
        self.cases = np.asarray(self.cases, dtype=int)
        self.cites = np.asarray(self.cites, dtype=int)
        self.p_corp = np.asarray(self.p_corp, dtype=float)
        self.p_crown = np.asarray(self.p_crown, dtype=float)
        self.p_dissent = np.asarray(self.p_dissent, dtype=float)
        if np.any(self.cases < 0) or np.any(self.cites < 0):
            raise ValueError("case and citation counts must be >= 0")
        for p in (self.p_corp, self.p_crown, self.p_dissent):
            if np.any((p < 0) | (p > 1)):
                raise ValueError("attribute rates must be probabilities")

    @property
    def n_steps(self) -> int:
        return len(self.periods)

    @classmethod
    def read_csv(cls, path) -> "CaseTable":
        periods, cases, cites, pc, pk, pd_ = [], [], [], [], [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                periods.append(rec["period"])
                cases.append(int(rec["cases"]))
                cites.append(int(rec["cites"]))
                pc.append(float(rec["p_corp"]))
                pk.append(float(rec["p_crown"]))
                pd_.append(float(rec["p_dissent"]))
        return cls(periods, np.array(cases), np.array(cites),
                   np.array(pc), np.array(pk), np.array(pd_))


def default_case_table() -> CaseTable:
    """The bundled Supreme Court schedule (1950-4 through 2010-4)."""
    ref = resources.files("abcnet").joinpath("data/case_table.csv")
    with resources.as_file(ref) as path:
        return CaseTable.read_csv(path)


@dataclass
class CitationHistory:
    """Cases, their attribute flags, and per-step citation counts."""

    created_step: np.ndarray   # (n,) int; negative for seeded cases
    flags: np.ndarray          # (n, 3) int: corp, crown, dissent
    counts: np.ndarray         # (T, n) int over the simulated window

    def __post_init__(self):
        self.created_step = np.asarray(self.created_step, dtype=int)
        self.flags = np.asarray(self.flags, dtype=int)
        self.counts = np.atleast_2d(np.asarray(self.counts, dtype=int))
        n = len(self.created_step)
        if self.flags.shape != (n, 3):
            raise ValueError("flags must be (n_cases, 3)")
        if self.counts.shape[1] != n:
            raise ValueError("counts must have one column per case")
        t_idx = np.arange(self.counts.shape[0])[:, None]
        if np.any(self.counts[t_idx < self.created_step[None, :]] != 0):
            raise ValueError("a case received citations before its creation")

    @property
    def n_cases(self) -> int:
        return len(self.created_step)

    @property
    def n_steps(self) -> int:
        return self.counts.shape[0]

    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def attractiveness_exponents(x_irrel, x_pa, flags, params: AttractParams) -> np.ndarray:
    beta = np.array([params.b_corp, params.b_crown, params.b_dissent])
    expo = params.b_irrel * x_irrel + params.b_pa * x_pa + flags @ beta
    return np.clip(expo, -EXP_CLAMP, EXP_CLAMP)


def attractiveness(x_irrel, x_pa, flags, params: AttractParams) -> np.ndarray:
    """exp(linear predictor) per case; always positive."""
    return np.exp(attractiveness_exponents(x_irrel, x_pa, flags, params))


def simulate_history(
    params: AttractParams,
    table: CaseTable,
    rng: np.random.Generator,
    seed_history: CitationHistory | None = None,
) -> CitationHistory:
    """Simulate the scheduled window, optionally on top of seeded cases.

    Seeded cases enter with x_irrel = steps since their creation or last
    citation and x_pa = sqrt(citations in the seed's final step).
    """
    if seed_history is not None:
        n0 = seed_history.n_cases
        created = list(-seed_history.n_steps + seed_history.created_step)
        flags = [row for row in seed_history.flags]
        last_cited = np.full(n0, -np.inf)
        for t in range(seed_history.n_steps):
            cited = seed_history.counts[t] > 0
            last_cited[cited] = t
        since = np.where(
            np.isfinite(last_cited),
            seed_history.n_steps - 1 - last_cited,
            seed_history.n_steps - 1 - seed_history.created_step,
        )
        x_irrel = list(since.astype(float))
        x_pa = list(np.sqrt(seed_history.counts[-1]).astype(float))
    else:
        created, flags, x_irrel, x_pa = [], [], [], []

    all_counts = []
    for t in range(table.n_steps):
        m = int(table.cases[t])
        if m > 0:
            p = np.array([table.p_corp[t], table.p_crown[t], table.p_dissent[t]])
            new_flags = (rng.random((m, 3)) < p).astype(int)
            for row in new_flags:
                flags.append(row)
            created.extend([t] * m)
            x_irrel.extend([0.0] * m)
            x_pa.extend([0.0] * m)

        n = len(created)
        cites = int(table.cites[t])
        if cites > 0:
            if n == 0:
                raise ValueError(f"step {table.periods[t]}: citations scheduled "
                                 "but no cases exist")
            a = attractiveness(np.array(x_irrel), np.array(x_pa),
                               np.array(flags), params)
            prob = a / a.sum()
            step_counts = rng.multinomial(cites, prob)
        else:
            step_counts = np.zeros(n, dtype=int)
        all_counts.append(step_counts)

        xi = np.array(x_irrel)
        xi = np.where(step_counts > 0, 0.0, xi + 1.0)
        x_irrel = list(xi)
        x_pa = list(np.sqrt(step_counts).astype(float))

    n = len(created)
    counts = np.zeros((table.n_steps, n), dtype=int)
    for t, sc in enumerate(all_counts):
        counts[t, : len(sc)] = sc
    return CitationHistory(
        created_step=np.array(created),
        flags=np.array(flags).reshape(n, 3),
        counts=counts,
    )


def p_cold(history: CitationHistory, per_case: bool = False) -> float:
    """Probability that a cited case receives nothing the next step.

    Pooled over all (case, step) transitions by default; `per_case`
    averages per-case ratios instead. NaN when no case was ever hot.
    """
    c = history.counts
    if c.shape[0] < 2:
        return float("nan")
    hot = c[:-1] >= 1
    cold_next = c[1:] == 0
    if per_case:
        denom = hot.sum(axis=0)
        ok = denom > 0
        if not ok.any():
            return float("nan")
        ratios = (hot & cold_next).sum(axis=0)[ok] / denom[ok]
        return float(ratios.mean())
    denom = int(hot.sum())
    if denom == 0:
        return float("nan")
    return float((hot & cold_next).sum() / denom)


def poisson_glm(history: CitationHistory, tol: float = 1e-8,
                max_iter: int = 50) -> np.ndarray:
    """Log-link Poisson fit of total citations on the three flags.

    Returns (corp, crown, dissent) coefficients; entries are NaN for
    flags without variation, and the whole vector is NaN when IRLS does
    not converge.
    """
    y = history.totals().astype(float)
    out = np.full(3, np.nan)
    if len(y) < 4 or y.sum() == 0:
        return out
    varying = [j for j in range(3)
               if len(np.unique(history.flags[:, j])) > 1]
    if not varying:
        return out
    X = np.column_stack([np.ones(len(y))] +
                        [history.flags[:, j].astype(float) for j in varying])
    beta = np.zeros(X.shape[1])
    beta[0] = np.log(y.mean())
    for _ in range(max_iter):
        eta = np.clip(X @ beta, -30.0, 30.0)
        mu = np.exp(eta)
        z = eta + (y - mu) / mu
        xtw = X.T * mu
        try:
            new = np.linalg.solve(xtw @ X, xtw @ z)
        except np.linalg.LinAlgError:
            return out
        step = np.max(np.abs(new - beta)) / (1.0 + np.max(np.abs(new)))
        beta = new
        if step < tol:
            for pos, j in enumerate(varying):
                out[j] = beta[1 + pos]
            return out
    return out


def citation_stats(history: CitationHistory) -> StatVector:
    """The five summary statistics of a citation history."""
    totals = history.totals().astype(float)
    sd = float(np.std(totals, ddof=1)) if len(totals) > 1 else 0.0
    g = poisson_glm(history)
    return StatVector(
        names=list(CITATION_STAT_NAMES),
        values=np.array([sd, p_cold(history), g[0], g[1], g[2]]),
    )


def abc_estimate(sims: SimTable, observed) -> dict:
    """Weighted-mean parameter estimate from statistic distances.

    Each complete simulation gets weight exp(-d^2 / (2 h^2)) / prior
    density, with d the per-statistic standardized Euclidean distance to
    the observed vector.
    """
    if isinstance(observed, StatVector):
        observed = observed.as_dict()
    obs = np.array([float(observed[s]) for s in sims.stat_names])
    keep = ~np.isnan(sims.stats).any(axis=1)
    stats = sims.stats[keep]
    params = sims.params[keep]
    dens = sims.prior_density[keep]
    n = len(stats)
    if n < 1:
        raise ValueError("no complete simulations")
    sd = stats.std(axis=0, ddof=1) if n > 1 else np.ones(stats.shape[1])
    sd = np.where(sd > 0, sd, 1.0)
    d2 = (((stats - obs) / sd) ** 2).sum(axis=1)
    h = scott_factor(n, len(sims.param_names) + len(sims.stat_names))
    w = np.exp(-0.5 * d2 / h ** 2) / dens
    total = w.sum()
    if total == 0 or not np.isfinite(total):
        raise ValueError("all simulation weights vanished; observed "
                         "statistics are too far from every simulation")
    est = (w[:, None] * params).sum(axis=0) / total
    return dict(zip(sims.param_names, (float(v) for v in est)))


def read_history_csv(citations_path, counts_path) -> CitationHistory:
    """Load an observed history from citations.csv and counts.csv."""
    ids, created, flags = [], [], []
    with open(citations_path, newline="") as fh:
        for rec in csv.DictReader(fh):
            ids.append(rec["case_id"])
            created.append(int(rec["created_step"]))
            flags.append([int(rec["corp"]), int(rec["crown"]), int(rec["dissent"])])
    index = {cid: i for i, cid in enumerate(ids)}
    entries = []
    max_step = 0
    with open(counts_path, newline="") as fh:
        for rec in csv.DictReader(fh):
            step = int(rec["step"])
            max_step = max(max_step, step)
            entries.append((index[rec["case_id"]], step, int(rec["count"])))
    counts = np.zeros((max_step + 1, len(ids)), dtype=int)
    for i, step, cnt in entries:
        counts[step, i] += cnt
    return CitationHistory(
        created_step=np.array(created),
        flags=np.array(flags),
        counts=counts,
    )
