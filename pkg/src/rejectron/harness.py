"""Seeded multi-repetition experiments, aggregation and bound verification.

Seeding scheme (all 64-bit, SplitMix64-derived):

* repetition ``r`` uses ``rep_seed = derive_seed(base_seed, r)``;
* its example stream is drawn from ``derive_seed(rep_seed, 0)``;
* its Bernoulli query draws come from ``derive_seed(rep_seed, 1)``, one
  uniform per trial whether or not the learner needs it.

Risk is measured against the true label at every trial. That is a
measurement taken by the harness; the learner kernels only read a label on
trials where they query it.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, bounds, losses
from .data import Dataset, add_bias, normalize, resolve_dataset, stream_indices, synthetic_separable
from .kernel import KernelSpec
from .linear import StepSchedule
from .losses import HyperParams
from .query import SeededRng, derive_seed

LEARNERS = ("dral", "dsal", "dsol", "kernel-dral", "kernel-dsal")
_VARIANT = {"dral": _kernels.DRAL, "dsal": _kernels.DSAL, "dsol": _kernels.DSOL}

METRICS = ("risk", "fraction_queried", "fraction_misclassified", "fraction_rejected")


@dataclass(frozen=True)
class RunConfig:
    learner: str = "dral"
    hp: HyperParams = field(default_factory=lambda: HyperParams(0.25, 2.0))
    schedule: StepSchedule = field(default_factory=StepSchedule)
    kernel: KernelSpec = None
    T: int = 10_000
    repetitions: int = 1
    base_seed: int = 0
    dataset: object = "synthetic:n=500,dim=10,radius=5"
    stream_mode: str = "with-replacement"
    normalization: str = "none"
    bias: bool = False

    def __post_init__(self):
        if self.learner not in LEARNERS:
            raise ValueError(f"unknown learner {self.learner!r}; expected one of {LEARNERS}")
        if self.T < 1 or self.repetitions < 1:
            raise ValueError("T and repetitions must be at least 1")
        if self.learner.startswith("kernel-") != (self.kernel is not None):
            raise ValueError("a kernel spec is required exactly for the kernel learners")
        if self.stream_mode not in ("with-replacement", "shuffle-epochs"):
            raise ValueError(f"unknown stream mode {self.stream_mode!r}")
        if self.normalization not in ("none", "unit-ball", "per-feature-scale"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        self.schedule.etas(self.T)


def prepare_dataset(cfg, base_dir=None):
    ds = cfg.dataset if isinstance(cfg.dataset, Dataset) else resolve_dataset(cfg.dataset, base_dir)
    if cfg.bias:
        ds = add_bias(ds)
    return normalize(ds, cfg.normalization)


@dataclass(frozen=True)
class TrialRecord:
    t: int
    queried: bool
    loss_d: float
    outcome: bounds.Outcome
    rejected: bool
    misclassified: bool
    rho_t: float
    eta_t: float
    grad_norm_sq: float


@dataclass
class RunTrace:
    """Per-trial telemetry of one repetition, stored column-wise."""

    rep_seed: int
    indices: np.ndarray
    f: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    probability: np.ndarray
    queried: np.ndarray
    branch: np.ndarray
    labels: np.ndarray
    loss_d: np.ndarray
    outcome: np.ndarray
    rejected: np.ndarray
    misclassified: np.ndarray
    grad_norm_sq: np.ndarray
    final_rho: float
    projections: int
    final_w: np.ndarray = None
    n_supports: int = 0

    @property
    def T(self):
        return len(self.f)

    @property
    def updated(self):
        return self.branch != _kernels.NO_UPDATE

    @property
    def margins(self):
        return self.labels * self.f

    def records(self):
        for t in range(self.T):
            yield TrialRecord(
                t + 1,
                bool(self.queried[t]),
                float(self.loss_d[t]),
                bounds.Outcome(int(self.outcome[t])),
                bool(self.rejected[t]),
                bool(self.misclassified[t]),
                float(self.rho[t]),
                float(self.eta[t]),
                float(self.grad_norm_sq[t]),
            )

    def curves(self):
        t = np.arange(1, self.T + 1)
        return {
            "risk": np.cumsum(self.loss_d) / t,
            "fraction_queried": np.cumsum(self.queried) / t,
            "fraction_misclassified": np.cumsum(self.misclassified) / t,
            "fraction_rejected": np.cumsum(self.rejected) / t,
        }

    def risk_vs_labels(self):
        """Cumulative average risk at the trial where the k-th label was asked, k = 1..Q."""
        risk = self.curves()["risk"]
        return risk[np.flatnonzero(self.queried)]

    def counters(self):
        return bounds.OutcomeCounters.from_codes(self.outcome, self.queried)

    def trajectory_hash(self):
        h = hashlib.sha256()
        for arr in (self.f, self.rho, self.queried, self.branch):
            h.update(np.ascontiguousarray(arr).tobytes())
        if self.final_w is not None:
            h.update(np.ascontiguousarray(self.final_w).tobytes())
        h.update(np.float64(self.final_rho).tobytes())
        return h.hexdigest()


def run_once(cfg, rep_seed, ds=None):
    """Replay one repetition; deterministic in ``(cfg, rep_seed)``."""
    if ds is None:
        ds = prepare_dataset(cfg)
    T = cfg.T
    idx = stream_indices(ds.n, T, derive_seed(rep_seed, 0), cfg.stream_mode)
    u = SeededRng(derive_seed(rep_seed, 1)).uniforms(T)
    etas = cfg.schedule.etas(T)
    X = ds.dense()
    y = ds.y.astype(float)
    d, gamma = cfg.hp.d, cfg.hp.gamma
    sq_norms = np.einsum("ij,ij->i", X, X)
    final_w, n_supports = None, 0
    if cfg.learner.startswith("kernel-"):
        variant = _VARIANT[cfg.learner[len("kernel-") :]]
        k = cfg.kernel
        f, rho, prob, queried, branch, coef, final_rho, proj = _kernels.run_kernel(
            X, sq_norms, y, idx, u, etas, d, gamma, variant, 1.0, k.code, k.degree, float(k.coef0), float(k.width)
        )
        n_supports = len(coef)
        if k.code == _kernels.LINEAR:
            self_k = sq_norms[idx]
        elif k.code == _kernels.POLYNOMIAL:
            self_k = (sq_norms[idx] + k.coef0) ** k.degree
        else:
            self_k = np.ones(T)
    else:
        variant = _VARIANT[cfg.learner]
        f, rho, prob, queried, branch, final_w, final_rho, proj = _kernels.run_linear(
            X, y, idx, u, etas, d, gamma, variant, 1.0
        )
        self_k = sq_norms[idx]
    labels = y[idx]
    margins = labels * f
    if variant == _kernels.DRAL:
        gns = np.zeros(T)
    else:
        g_margin, g_rho = losses.ds_gradient(margins, rho, cfg.hp)
        gns = g_margin**2 * self_k + g_rho**2
    return RunTrace(
        rep_seed=int(rep_seed),
        indices=idx,
        f=f,
        rho=rho,
        eta=etas,
        probability=prob,
        queried=queried,
        branch=branch,
        labels=labels,
        loss_d=losses.zero_d_one_loss(margins, rho, d),
        outcome=bounds.classify_outcomes(margins, rho),
        rejected=np.abs(f) <= rho,
        misclassified=margins < -rho,
        grad_norm_sq=gns,
        final_rho=float(final_rho),
        projections=int(proj),
        final_w=final_w,
        n_supports=n_supports,
    )


def repetition_seeds(cfg):
    return [derive_seed(cfg.base_seed, r) for r in range(cfg.repetitions)]


def run_repetitions(cfg, jobs=1, ds=None):
    """All repetitions of ``cfg``, in repetition order regardless of ``jobs``."""
    if ds is None:
        ds = prepare_dataset(cfg)
    seeds = repetition_seeds(cfg)
    if jobs <= 1:
        return [run_once(cfg, s, ds) for s in seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda s: run_once(cfg, s, ds), seeds))


@dataclass
class RunAggregate:
    t: np.ndarray
    mean: dict
    std: dict
    labels_asked: np.ndarray
    risk_by_labels_mean: np.ndarray
    risk_by_labels_std: np.ndarray

    def final(self, metric):
        return float(self.mean[metric][-1]), float(self.std[metric][-1])


def aggregate(runs):
    """Pointwise mean and population standard deviation across repetitions."""
    if not runs:
        raise ValueError("need at least one run")
    T = runs[0].T
    if any(r.T != T for r in runs):
        raise ValueError("all runs must have the same number of trials")
    per_run = [r.curves() for r in runs]
    mean, std = {}, {}
    for name in METRICS:
        stack = np.vstack([c[name] for c in per_run])
        mean[name] = stack.mean(axis=0)
        std[name] = stack.std(axis=0)
    by_labels = [r.risk_vs_labels() for r in runs]
    K = min(len(b) for b in by_labels)
    stack = np.vstack([b[:K] for b in by_labels]) if K else np.zeros((len(runs), 0))
    return RunAggregate(
        t=np.arange(1, T + 1),
        mean=mean,
        std=std,
        labels_asked=np.arange(1, K + 1),
        risk_by_labels_mean=stack.mean(axis=0),
        risk_by_labels_std=stack.std(axis=0),
    )


def _fmt(x):
    return repr(float(x))


def write_csvs(agg, out_dir):
    """Write one ``t,mean,std`` CSV per metric plus ``risk_vs_labels.csv``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in METRICS:
        path = out_dir / f"{name}.csv"
        lines = ["t,mean,std"]
        lines += [f"{t},{_fmt(m)},{_fmt(s)}" for t, m, s in zip(agg.t, agg.mean[name], agg.std[name])]
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    path = out_dir / "risk_vs_labels.csv"
    lines = ["labels_asked,mean_risk,std_risk"]
    lines += [
        f"{k},{_fmt(m)},{_fmt(s)}"
        for k, m, s in zip(agg.labels_asked, agg.risk_by_labels_mean, agg.risk_by_labels_std)
    ]
    path.write_text("\n".join(lines) + "\n")
    paths.append(path)
    return paths


# -- verification --------------------------------------------------------------


def format_report(pairs):
    """Line-oriented ``key=value`` text."""
    return "".join(f"{k}={v}\n" for k, v in pairs)


@dataclass
class MistakeBoundCase:
    seed: int
    d: float
    W: float
    R: float
    rho_star: float
    eta: float
    reject_count: int
    mistake_count: int
    reject_rhs: float
    mistake_rhs: float

    @property
    def passed(self):
        return self.reject_count <= self.reject_rhs and self.mistake_count <= self.mistake_rhs


@dataclass
class MistakeBoundReport:
    cases: list

    @property
    def passed(self):
        return bool(self.cases) and all(c.passed for c in self.cases)

    def to_text(self):
        pairs = [("suite", "mistake-bounds"), ("cases", len(self.cases))]
        pairs.append(("passes", sum(c.passed for c in self.cases)))
        for c in self.cases:
            pairs.append(
                (
                    f"case.d={c.d}.seed={c.seed}",
                    f"{'pass' if c.passed else 'FAIL'} reject_count={c.reject_count} "
                    f"reject_rhs={c.reject_rhs!r} mistake_count={c.mistake_count} mistake_rhs={c.mistake_rhs!r} "
                    f"W={c.W!r} R={c.R!r} rho_star={c.rho_star} eta={c.eta}",
                )
            )
        pairs.append(("result", "pass" if self.passed else "fail"))
        return format_report(pairs)


def verify_mistake_bounds(
    d_values=(0.1, 0.25, 0.4), seeds=range(100), T=10_000, eta=0.1, n=500, dim=10, rho_star=0.5, margin_slack=0.1
):
    """Run DRAL on separable synthetic streams and compare the counts with the separable-case bounds.

    Rejections are the R1 + R2 indicator counts and mistakes the M count,
    both restricted to queried trials, evaluated against the witness norm
    ``W = ||w*||`` and the observed ``R``.
    """
    cases = []
    for seed in seeds:
        ds, w_star, rho = synthetic_separable(n, dim, rho_star, margin_slack, seed=seed)
        W, R = float(np.linalg.norm(w_star)), ds.R
        for d in d_values:
            cfg = RunConfig(
                learner="dral",
                hp=HyperParams(d),
                schedule=StepSchedule.constant(eta),
                T=T,
                dataset=ds,
                normalization="none",
            )
            trace = run_once(cfg, derive_seed(seed, 0xB0))
            counts = trace.counters()
            reject_rhs, mistake_rhs = bounds.theorem2_bounds(bounds.BoundInputs(W, R, rho, d, eta))
            cases.append(MistakeBoundCase(seed, d, W, R, rho, eta, counts.rejected, counts.M, reject_rhs, mistake_rhs))
    return MistakeBoundReport(cases)


@dataclass
class RegretCase:
    seed: int
    regret: float
    rhs: float
    T: int
    corollary_rhs: float

    @property
    def passed(self):
        return self.regret <= self.rhs


@dataclass
class RegretReport:
    gamma: float
    R: float
    eta: float
    cases: list

    @property
    def passed(self):
        return bool(self.cases) and all(c.passed for c in self.cases)

    def to_text(self):
        pairs = [("suite", "regret"), ("gamma", self.gamma), ("R", self.R), ("eta", self.eta)]
        pairs.append(("passes", sum(c.passed for c in self.cases)))
        for c in self.cases:
            pairs.append(
                (
                    f"case.seed={c.seed}",
                    f"{'pass' if c.passed else 'FAIL'} regret={c.regret!r} rhs={c.rhs!r} "
                    f"regret_over_T={c.regret / c.T!r} corollary_rhs={c.corollary_rhs!r}",
                )
            )
        pairs.append(("result", "pass" if self.passed else "fail"))
        return format_report(pairs)


def verify_local_regret(seeds=range(20), T=10_000, gamma=2.0, d=0.25, learner="dsal", dataset="synthetic:n=500,dim=10"):
    """DSAL (or DSOL) at the prescribed step size versus the local-regret bound.

    The bound is evaluated with the nominal ``R = 1`` of the unit-ball
    normalization, which upper-bounds every example norm.
    """
    if learner not in ("dsal", "dsol"):
        raise ValueError("local regret is defined for the double sigmoid learners")
    R = 1.0
    eta = bounds.theorem6_step_size(gamma, R)
    base = RunConfig(
        learner=learner,
        hp=HyperParams(d, gamma),
        schedule=StepSchedule.constant(eta),
        T=T,
        dataset=dataset,
        normalization="unit-ball",
    )
    ds = prepare_dataset(base)
    assert ds.R <= R + 1e-12
    cases = []
    for seed in seeds:
        trace = run_once(base, derive_seed(seed, 0xC0), ds)
        regret = bounds.local_regret(trace.grad_norm_sq)
        cases.append(RegretCase(seed, regret, bounds.theorem6_rhs(gamma, R, T), T, bounds.corollary7_rhs(gamma, R, T)))
    return RegretReport(gamma, R, eta, cases)


@dataclass
class TrendVerdict:
    metric: str
    direction: str
    d_values: tuple
    finals: tuple
    stds: tuple
    passed: bool

    def line(self):
        vals = " ".join(f"d={d}:{m:.6g}+-{s:.3g}" for d, m, s in zip(self.d_values, self.finals, self.stds))
        return f"{'pass' if self.passed else 'FAIL'} {self.direction} in d: {vals}"


def _trend(metric, direction, aggs):
    ds = tuple(sorted(aggs))
    finals = tuple(aggs[d].final(metric)[0] for d in ds)
    stds = tuple(aggs[d].final(metric)[1] for d in ds)
    ok = True
    for i in range(len(ds) - 1):
        slack = max(stds[i], stds[i + 1])
        step = finals[i + 1] - finals[i]
        ok &= step <= slack if direction == "non-increasing" else step >= -slack
    return TrendVerdict(metric, direction, ds, finals, stds, bool(ok))


@dataclass
class BudgetVerdict:
    rule: str
    values: tuple
    passed: bool

    def line(self):
        return f"{'pass' if self.passed else 'FAIL'} {self.rule}: " + " ".join(f"{v:.6g}" for v in self.values)


def _label_budget(learner, aggs):
    ds = sorted(aggs)
    if learner.endswith("dsol"):
        ok = all(np.all(aggs[d].mean["fraction_queried"] == 1.0) for d in ds)
        return BudgetVerdict("fraction queried equals 1 at every trial", tuple(1.0 if ok else 0.0 for d in ds), ok)
    finals = tuple(aggs[d].final("fraction_queried")[0] for d in ds)
    return BudgetVerdict("final fraction queried below 0.9", finals, all(q < 0.9 for q in finals))


@dataclass
class ObservationReport:
    learner: str
    verdicts: list
    budget: BudgetVerdict = None

    @property
    def passed(self):
        ok = all(v.passed for v in self.verdicts)
        return ok and (self.budget is None or self.budget.passed)

    def to_text(self):
        pairs = [("learner", self.learner)]
        pairs += [(f"trend.{v.metric}", v.line()) for v in self.verdicts]
        if self.budget is not None:
            pairs.append(("budget", self.budget.line()))
        pairs.append(("result", "pass" if self.passed else "fail"))
        return format_report(pairs)


def observation_checks(aggs, learner=""):
    """Final-trial trends across rejection costs, each allowed one standard deviation of slack.

    ``aggs`` maps ``d`` to the aggregate of otherwise identical configs.
    Checked: queried fraction and rejection rate non-increasing in ``d``;
    average risk non-decreasing in ``d``. When ``learner`` is given, its label
    budget is checked too: DSOL asks every label, the active learners fewer
    than 90%.
    """
    verdicts = [
        _trend("fraction_queried", "non-increasing", aggs),
        _trend("fraction_rejected", "non-increasing", aggs),
        _trend("risk", "non-decreasing", aggs),
    ]
    return ObservationReport(learner, verdicts, _label_budget(learner, aggs) if learner else None)
