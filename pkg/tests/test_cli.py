import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from rejectron import cli, losses

ROOT = Path(__file__).resolve().parents[1]
TINY = ROOT / "configs" / "tiny.cfg"


def write(path, text):
    path.write_text(text)
    return path


def test_run_writes_curves(tmp_path, capsys):
    assert cli.main(["run", "--config", str(TINY), "--out", str(tmp_path / "o")]) == 0
    names = sorted(p.name for p in (tmp_path / "o").glob("*.csv"))
    assert names == sorted(cli.CURVE_FILES)
    manifest = (tmp_path / "o" / "manifest.txt").read_text()
    assert "config.learner=dsal" in manifest and "rep.2.trajectory_sha256=" in manifest
    assert "final_risk=" in capsys.readouterr().out


def test_unknown_key_is_a_config_error(tmp_path, capsys):
    cfg = write(tmp_path / "bad.cfg", "learner=dral\nfoo=1\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "'foo'" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["learner=dral\nlearner=dsal\n", "no equals sign\n", "d=0.7\n", "T=abc\n"])
def test_other_config_errors(tmp_path, text):
    cfg = write(tmp_path / "bad.cfg", text)
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_missing_dataset_exits_2(tmp_path):
    cfg = write(tmp_path / "c.cfg", "dataset=missing.libsvm\nT=10\nrepetitions=1\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_seed_flag_overrides_file(tmp_path):
    cli.main(["run", "--config", str(TINY), "--out", str(tmp_path / "a")])
    cli.main(["run", "--config", str(TINY), "--out", str(tmp_path / "b"), "--seed", "99"])
    assert (tmp_path / "a" / "risk.csv").read_bytes() != (tmp_path / "b" / "risk.csv").read_bytes()
    assert "config.seed=99" in (tmp_path / "b" / "manifest.txt").read_text()


def test_reruns_are_byte_identical(tmp_path):
    for sub, jobs in (("a", "1"), ("b", "3")):
        assert cli.main(["run", "--config", str(TINY), "--out", str(tmp_path / sub), "--jobs", jobs]) == 0
    for name in cli.CURVE_FILES + ("manifest.txt",):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bench_empty_dir(tmp_path):
    (tmp_path / "empty").mkdir()
    assert cli.main(["bench", "--config", str(tmp_path / "empty"), "--out", str(tmp_path / "o")]) == 1


def test_bench_sweep(tmp_path):
    cfg_dir = tmp_path / "sweep"
    cfg_dir.mkdir()
    for d in ("0.1", "0.25", "0.4"):
        write(cfg_dir / f"dsol-d{d}.cfg", f"learner=dsol\nd={d}\nT=300\nrepetitions=2\ndataset=synthetic:n=50,dim=5,radius=5\n")
    code = cli.main(["bench", "--config", str(cfg_dir), "--out", str(tmp_path / "o")])
    assert len(list((tmp_path / "o").rglob("*.csv"))) == 15
    report = (tmp_path / "o" / "report.txt").read_text()
    assert report.count("trend.") == 3 and "budget=pass" in report
    assert code == (0 if "result=pass" in report else 3)


def test_verify_gradcheck_passes(tmp_path):
    assert cli.main(["verify", "--suite", "gradcheck", "--out", str(tmp_path)]) == 0
    assert "result=pass" in (tmp_path / "verify_report.txt").read_text()


def test_verify_detects_broken_gradient(monkeypatch, capsys):
    real = losses.ds_gradient

    def flipped(margin, rho, hp):
        g_m, g_r = real(margin, rho, hp)
        return g_m, -g_r

    monkeypatch.setattr(losses, "ds_gradient", flipped)
    assert cli.main(["verify", "--suite", "gradcheck"]) == 3
    assert "finite-difference=FAIL" in capsys.readouterr().out


def test_verify_rejects_unknown_suite():
    assert cli.main(["verify", "--suite", "nonsense"]) == 1


def test_plot(tmp_path):
    cli.main(["run", "--config", str(TINY), "--out", str(tmp_path / "csv")])
    for sub in ("a", "b"):
        assert cli.main(["plot", str(tmp_path / "csv"), "--out", str(tmp_path / sub)]) == 0
    svgs = sorted((tmp_path / "a").glob("*.svg"))
    assert len(svgs) == 5
    for svg in svgs:
        root = ET.parse(svg).getroot()
        assert root.tag.endswith("svg")
        assert svg.read_bytes() == (tmp_path / "b" / svg.name).read_bytes()


def test_plot_missing_csv(tmp_path):
    cli.main(["run", "--config", str(TINY), "--out", str(tmp_path / "csv")])
    (tmp_path / "csv" / "risk.csv").unlink()
    assert cli.main(["plot", str(tmp_path / "csv"), "--out", str(tmp_path / "svg")]) == 2


def test_plot_thins_long_curves():
    from rejectron import plot

    xs = list(range(5000))
    svg = plot.render_svg("t", "t", xs, [np.sin(x) for x in xs], [0.1] * 5000)
    points = svg.split('<polyline')[1].split('points="')[1].split('"')[0].split()
    assert len(points) <= 400
