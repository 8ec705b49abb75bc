"""Property suites behind ``rejectron verify``.

Each suite returns a :class:`SuiteReport` with one line per check. The
gradient suite looks ``ds_gradient`` up on the ``losses`` module at call
time, so a patched (deliberately broken) gradient is what gets checked.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import harness, losses
from .kernel import KernelSpec
from .losses import HyperParams
from .query import SeededRng

D_VALUES = (0.1, 0.25, 0.4)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"{self.name}={'pass' if self.passed else 'FAIL'} {self.detail}".rstrip()


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_text(self):
        lines = [f"suite={self.suite}"] + [c.line() for c in self.checks]
        lines.append(f"seconds={self.seconds:.3f}")
        lines.append(f"result={'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        report = fn(*args, **kwargs)
        report.seconds = time.perf_counter() - start
        return report

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def gradcheck(n=1000, seed=0, h=1e-6, rtol=1e-4, atol=1e-6, small=1e-3):
    """Analytic gradient against central differences of the loss itself."""
    rng = SeededRng(seed)
    m = rng.uniforms(n) * 10.0 - 5.0
    rho = rng.uniforms(n) * 3.0
    gamma = 0.5 + rng.uniforms(n) * 3.5
    d = np.asarray(D_VALUES)[rng.integers(len(D_VALUES), n)]
    worst_rel = worst_abs = 0.0
    failures = 0
    for i in range(n):
        hp = HyperParams(float(d[i]), float(gamma[i]))
        g_m, g_r = losses.ds_gradient(float(m[i]), float(rho[i]), hp)
        L = losses.double_sigmoid_loss
        fd_m = (L(m[i] + h, rho[i], hp) - L(m[i] - h, rho[i], hp)) / (2 * h)
        fd_r = (L(m[i], rho[i] + h, hp) - L(m[i], rho[i] - h, hp)) / (2 * h)
        for analytic, numeric in ((g_m, fd_m), (g_r, fd_r)):
            err = abs(analytic - numeric)
            if abs(numeric) < small:
                worst_abs = max(worst_abs, err)
                failures += err > atol
            else:
                rel = err / abs(numeric)
                worst_rel = max(worst_rel, rel)
                failures += rel > rtol
    detail = f"samples={n} failures={failures} worst_rel={worst_rel:.3e} worst_abs={worst_abs:.3e}"
    return SuiteReport("gradcheck", [Check("finite-difference", failures == 0, detail)])


@_timed
def smoothness(n=10_000, seed=0, dim=5, R_values=(1.0, 2.0), gamma_values=(0.5, 2.0, 4.0), tol=1e-9):
    """Gradient Lipschitz bound over random parameter pairs sharing an example."""
    rng = SeededRng(seed)
    checks = []
    for R in R_values:
        for gamma in gamma_values:
            hp = HyperParams(D_VALUES[int(rng.integers(len(D_VALUES), 1)[0])], gamma)
            beta = losses.smoothness_constant(gamma, R)
            g = rng.normal((n, dim))
            x = g / np.linalg.norm(g, axis=1, keepdims=True) * (R * rng.uniforms(n) ** (1.0 / dim))[:, None]
            y = np.where(rng.uniforms(n) < 0.5, -1.0, 1.0)
            # keep margins within a few sigmoid widths so the pairs probe curvature
            scale = 3.0 / (gamma * max(R, 1.0))
            w1 = rng.normal((n, dim)) * scale
            rho1 = rng.uniforms(n) * 3.0 / gamma
            step = 10.0 ** (rng.uniforms(n) * 4.0 - 3.0)
            w2 = w1 + rng.normal((n, dim)) * step[:, None] * scale
            rho2 = rho1 + rng.normal(n) * step * scale
            m1, m2 = np.einsum("ij,ij->i", x, w1), np.einsum("ij,ij->i", x, w2)
            g1 = _full_gradient_rows(m1, rho1, x, y, hp)
            g2 = _full_gradient_rows(m2, rho2, x, y, hp)
            lhs = np.linalg.norm(g1 - g2, axis=1)
            dist = np.sqrt(np.sum((w1 - w2) ** 2, axis=1) + (rho1 - rho2) ** 2)
            violations = int(np.sum(lhs > beta * dist + tol))
            ratio = float(np.max(lhs / np.maximum(dist, 1e-300))) / beta
            checks.append(
                Check(
                    f"R={R}.gamma={gamma}",
                    violations == 0,
                    f"pairs={n} violations={violations} max_ratio_to_beta={ratio:.4f}",
                )
            )
    return SuiteReport("smoothness", checks)


def _full_gradient_rows(f_dot, rho, x, y, hp):
    g_m, g_r = losses.ds_gradient(y * f_dot, rho, hp)
    return np.concatenate([(y * g_m)[:, None] * x, np.asarray(g_r)[:, None]], axis=1)


@_timed
def mistake_bounds(seeds=range(100), T=10_000):
    rep = harness.verify_mistake_bounds(seeds=seeds, T=T)
    checks = [
        Check(
            f"d={c.d}.seed={c.seed}",
            c.passed,
            f"reject={c.reject_count}<={c.reject_rhs:.6g} mistake={c.mistake_count}<={c.mistake_rhs:.6g}",
        )
        for c in rep.cases
    ]
    return SuiteReport("mistake-bounds", checks)


@_timed
def regret(seeds=range(20), T=10_000):
    rep = harness.verify_local_regret(seeds=seeds, T=T)
    checks = [
        Check(
            f"seed={c.seed}",
            c.passed,
            f"regret={c.regret:.6g}<={c.rhs:.6g} regret_over_T={c.regret / c.T:.6g} corollary_rhs={c.corollary_rhs:.6g}",
        )
        for c in rep.cases
    ]
    return SuiteReport("regret", checks)


@_timed
def kernel_equivalence(seeds=range(5), T=1000, tol=1e-9, dataset="synthetic:n=500,dim=10,radius=5"):
    """Linear-kernel learners must replay their primal counterparts."""
    checks = []
    for learner in ("dral", "dsal"):
        primal_cfg = harness.RunConfig(learner=learner, T=T, dataset=dataset)
        kernel_cfg = harness.RunConfig(learner=f"kernel-{learner}", kernel=KernelSpec("linear"), T=T, dataset=dataset)
        ds = harness.prepare_dataset(primal_cfg)
        for seed in seeds:
            a = harness.run_once(primal_cfg, seed, ds)
            b = harness.run_once(kernel_cfg, seed, ds)
            gap = float(np.max(np.abs(a.f - b.f)))
            same = bool(np.array_equal(a.queried, b.queried))
            checks.append(
                Check(f"{learner}.seed={seed}", gap <= tol and same, f"max_f_gap={gap:.3e} same_queries={same}")
            )
    return SuiteReport("kernel-equivalence", checks)


SUITES = {
    "gradcheck": gradcheck,
    "smoothness": smoothness,
    "mistake-bounds": mistake_bounds,
    "regret": regret,
    "kernel-equivalence": kernel_equivalence,
}
