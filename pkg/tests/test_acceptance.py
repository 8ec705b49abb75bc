"""One test per acceptance criterion, at the stated tolerances and time limits."""

import time
from pathlib import Path

import pytest

import oracles
from rejectron import bounds, cli, verify
from rejectron.bounds import BoundInputs

ROOT = Path(__file__).resolve().parents[1]


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def test_criterion_1_gradient_matches_finite_differences():
    report, seconds = timed(verify.gradcheck, n=1000)
    print(report.to_text())
    assert report.passed
    assert seconds < 1.0


def test_criterion_2_smoothness_constant_holds():
    report, seconds = timed(verify.smoothness, n=10_000)
    print(report.to_text())
    assert report.passed
    assert seconds < 5.0


def test_criterion_3_local_regret_bound():
    report, seconds = timed(verify.regret, seeds=range(20), T=10_000)
    print(report.to_text())
    assert len(report.checks) == 20 and report.passed
    assert seconds < 10.0


def test_criterion_4_mistake_bounds():
    report, seconds = timed(verify.mistake_bounds, seeds=range(100), T=10_000)
    assert len(report.checks) == 300
    failed = [c.line() for c in report.checks if not c.passed]
    assert not failed, failed[:5]
    assert seconds < 60.0


def test_criterion_5_kernel_linear_equivalence():
    report, seconds = timed(verify.kernel_equivalence, T=1000, tol=1e-9)
    print(report.to_text())
    assert report.passed
    assert seconds < 5.0


@pytest.mark.parametrize("sweep", ["sweep-synthetic", "sweep-phishing"])
def test_criterion_6_label_complexity_observations(sweep, tmp_path):
    cfg_dir = ROOT / "configs" / sweep
    assert len(list(cfg_dir.glob("*.cfg"))) == 9
    code, seconds = timed(cli.main, ["bench", "--config", str(cfg_dir), "--out", str(tmp_path), "--jobs", "4"])
    report = (tmp_path / "report.txt").read_text()
    print(report)
    assert report.count("result=pass") == 3, report
    assert code == 0
    assert seconds < 600.0


def test_criterion_7_determinism(tmp_path):
    cfg = ROOT / "configs" / "tiny.cfg"
    for sub in ("a", "b"):
        assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / sub), "--seed", "5"]) == 0
    for name in cli.CURVE_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


TUPLES = [
    (2, 1, 0.5, 0.25, 0.1), (16, 1, 0.5, 0.1, 0.1), (16, 1, 0.5, 0.25, 0.1), (16, 1, 0.5, 0.4, 0.1),
    (3, 1, 1, 0.25, 0.05), (5, 2, 1.5, 0.1, 0.2), (1.5, 1, 0.25, 0.3, 0.5), (10, 0.5, 2, 0.45, 0.01),
    (4, 1, 3, 0.2, 1.0), (2.5, 2, 0.1, 0.05, 0.3), (8, 1, 4, 0.25, 0.1), (1, 1, 0.5, 0.25, 0.1),
    (6, 0.75, 1, 0.35, 0.15), (20, 1, 0.5, 0.4, 0.02), (3, 3, 2, 0.15, 0.25), (2, 1.5, 1, 0.49, 0.1),
    (7, 1, 0.75, 0.01, 0.1), (2, 2, 3.5, 0.25, 0.4), (9, 0.5, 1, 0.2, 0.6), (1.25, 4, 0.3, 0.33, 0.08),
    (12, 1, 5, 0.3, 0.05), (2, 1, 1.9, 0.25, 0.1),
]


def test_criterion_8_bound_constant_goldens():
    def close(a, b):
        return abs(a - float(b)) <= 1e-12 * max(1.0, abs(float(b)))

    assert len(TUPLES) >= 20
    for W, R, rho, d, eta in TUPLES:
        inp = BoundInputs(W, R, rho, d, eta)
        c = bounds.bound_constants(inp)
        o21, o22 = oracles.m21_m22(rho, d, W, R)
        o_rej, o_mis = oracles.alphas(W, R, rho, d, eta)
        assert close(c.m1, oracles.m1(rho, d, W, R))
        assert close(c.m21, o21) and close(c.m22, o22)
        assert close(c.alpha_reject, o_rej) and close(c.alpha_mistake, o_mis)
        for got, ref in zip(bounds.theorem2_bounds(inp), oracles.theorem2(W, R, rho, d, eta)):
            assert close(got, ref)
        for got, ref in zip(bounds.theorem3_bounds(inp, 7.5), oracles.theorem3(W, R, rho, d, eta, 7.5)):
            assert close(got, ref)
