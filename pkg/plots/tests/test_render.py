import hashlib
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from fedwireless_plots.cli import main
from fedwireless_plots.render import PlotSpec, render, _collect

FIXTURES = Path(__file__).parent / "fixtures"
SWEEP_CSV = FIXTURES / "sweep_small.csv"
GOLDEN_PNG = FIXTURES / "golden_bound.png"

SIM_HEADER = "round,policy,K,selected,test_accuracy,mean_loss,mean_q,mean_bits"


def write_sim_csv(path, policies=("bc", "bn2"), rounds=5):
    lines = [SIM_HEADER]
    for policy in policies:
        for t in range(rounds):
            acc = 0.5 + 0.08 * t + (0.01 if policy == "bn2" else 0.0)
            lines.append(f"{t},{policy},1,3;1,{acc!r},{1.0 - acc!r},12.0,400.0")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


class TestCollect:
    def test_accuracy_groups_by_policy_and_k(self, tmp_path):
        csv_path = write_sim_csv(tmp_path / "sim.csv")
        spec = PlotSpec(inputs=(csv_path,), kind="accuracy", out=str(tmp_path / "a.png"))
        series = _collect(spec)
        assert sorted(s.label for s in series) == ["bc (K=1)", "bn2 (K=1)"]
        assert all(len(s.x) == 5 for s in series)

    def test_bound_groups_by_series_column(self, tmp_path):
        spec = PlotSpec(inputs=(str(SWEEP_CSV),), kind="bound", out=str(tmp_path / "b.png"))
        series = _collect(spec)
        assert sorted(s.label for s in series) == ["K=1", "K=3", "K=5"]
        assert all(len(s.x) == 7 for s in series)

    def test_series_filter(self, tmp_path):
        spec = PlotSpec(inputs=(str(SWEEP_CSV),), kind="bound",
                        out=str(tmp_path / "b.png"), series=("K=3",))
        series = _collect(spec)
        assert [s.label for s in series] == ["K=3"]

    def test_filter_that_drops_everything_errors(self, tmp_path):
        spec = PlotSpec(inputs=(str(SWEEP_CSV),), kind="bound",
                        out=str(tmp_path / "b.png"), series=("K=99",))
        with pytest.raises(ValueError, match="series"):
            _collect(spec)


class TestRenderErrors:
    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("round,loss\n0,1.0\n")
        spec = PlotSpec(inputs=(str(bad),), kind="bound", out=str(tmp_path / "o.png"))
        with pytest.raises(ValueError, match="series"):
            render(spec)

    def test_empty_csv_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        spec = PlotSpec(inputs=(str(empty),), kind="bound", out=str(tmp_path / "o.png"))
        with pytest.raises(ValueError, match="empty"):
            render(spec)

    def test_header_only_rejected(self, tmp_path):
        hdr = tmp_path / "hdr.csv"
        hdr.write_text("series,round,rho_mean,dist_bound,loss_gap_bound\n")
        spec = PlotSpec(inputs=(str(hdr),), kind="bound", out=str(tmp_path / "o.png"))
        with pytest.raises(ValueError, match="no data rows"):
            render(spec)

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="kind"):
            PlotSpec(inputs=("x.csv",), kind="pie", out=str(tmp_path / "o.png"))

    def test_unknown_extension_rejected(self):
        with pytest.raises(ValueError, match="png"):
            PlotSpec(inputs=("x.csv",), kind="bound", out="fig.pdf")


class TestRenderOutputs:
    def test_png_and_svg_created(self, tmp_path):
        csv_path = write_sim_csv(tmp_path / "sim.csv")
        for name in ("fig.png", "fig.svg"):
            out = tmp_path / name
            got = render(PlotSpec(inputs=(csv_path,), kind="accuracy", out=str(out)))
            assert got == str(out)
            assert out.stat().st_size > 0

    def test_render_does_not_mutate_inputs(self, tmp_path):
        csv_path = tmp_path / "sweep.csv"
        shutil.copy(SWEEP_CSV, csv_path)
        before = hashlib.sha256(csv_path.read_bytes()).hexdigest()
        render(PlotSpec(inputs=(str(csv_path),), kind="bound",
                        out=str(tmp_path / "o.png")))
        assert hashlib.sha256(csv_path.read_bytes()).hexdigest() == before

    def test_golden_image_regression(self, tmp_path):
        """Pixel-exact match against the checked-in figure of the pinned CSV."""
        out = tmp_path / "bound.png"
        render(PlotSpec(inputs=(str(SWEEP_CSV),), kind="bound", out=str(out), logy=True))
        got = np.asarray(Image.open(out))
        want = np.asarray(Image.open(GOLDEN_PNG))
        assert got.shape == want.shape
        np.testing.assert_array_equal(got, want)

    def test_two_policy_accuracy_figure_lists_both_in_legend(self, tmp_path):
        csv_path = write_sim_csv(tmp_path / "sim.csv")
        out = tmp_path / "acc.svg"
        render(PlotSpec(inputs=(csv_path,), kind="accuracy", out=str(out)))
        svg = out.read_text()
        assert "bc (K=1)" in svg
        assert "bn2 (K=1)" in svg


class TestCli:
    def test_bound_invocation(self, tmp_path):
        out = tmp_path / "fig.png"
        code = main(["bound", "--in", str(SWEEP_CSV), "--out", str(out), "--logy"])
        assert code == 0
        assert out.exists()

    def test_multiple_inputs(self, tmp_path):
        a = write_sim_csv(tmp_path / "a.csv", policies=("bc",))
        b = write_sim_csv(tmp_path / "b.csv", policies=("bn2-c",))
        out = tmp_path / "fig.png"
        assert main(["accuracy", "--in", a, "--in", b, "--out", str(out)]) == 0
        assert out.exists()

    def test_error_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "nope.csv"
        assert main(["bound", "--in", str(missing), "--out", str(tmp_path / "f.png")]) == 1
        assert "error" in capsys.readouterr().err


@pytest.fixture(scope="module")
def sweep_csv(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sweep")
    cfg = tmp / "sweep.cfg"
    cfg.write_text(
        "mode = sweep\nseed = 42\nM = 100\nK = 1\nn_slots = 1e5\n"
        "d = 203530\nT = 500\ntau = 3\nmu = 1.0\nL = 5.0\n"
        "G = 10.0\nGamma = 10.0\ninit_dist_sq = 500.0\n"
        "eta = decay:1000,3,1000\naxis = K\nvalues = 1,3,5,10,15,20\n"
        "replicas = 5\n"
    )
    out = tmp / "sweep.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "fedwireless", "sweep",
         "--config", str(cfg), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out


class TestEndToEndFromSimulator:
    """Criterion-style flow: the sweep CSV comes from the fedwireless CLI."""

    def test_one_curve_per_k_with_legend(self, sweep_csv, tmp_path):
        out = tmp_path / "sweep.svg"
        spec = PlotSpec(inputs=(str(sweep_csv),), kind="bound", out=str(out), logy=True)
        series = _collect(spec)
        assert sorted(s.label for s in series) == [
            "K=1", "K=10", "K=15", "K=20", "K=3", "K=5"
        ]
        assert all(len(s.x) == 501 for s in series)
        render(spec)
        svg = out.read_text()
        for label in ("K=1", "K=3", "K=5", "K=10", "K=15", "K=20"):
            assert label in svg
