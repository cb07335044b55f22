import json
import math
import pathlib

import numpy as np
import pytest

from cavpurify import load_channel
from cavpurify.cli import main

GOLDEN = pathlib.Path(__file__).parent / "golden"


def _run(argv, tmp_path, name="out.csv"):
    path = tmp_path / name
    code = main(argv + ["--output", str(path)])
    return code, path.read_text() if path.exists() else ""


def _split(text):
    header = [l for l in text.splitlines() if l.startswith("#")]
    data = [l for l in text.splitlines() if l and not l.startswith("#")]
    return header, data


def _data_values(text):
    rows = []
    for line in _split(text)[1][1:]:  # skip the column-name row
        rows.append([float(v) for v in line.split(",")])
    return np.array(rows)


def _assert_matches_golden(text, golden_name):
    golden = (GOLDEN / golden_name).read_text()
    got = _data_values(text)
    want = _data_values(golden)
    assert got.shape == want.shape
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


class TestQfunc:
    def test_matches_golden(self, tmp_path):
        code, text = _run(
            ["qfunc", "--nbar", "100", "--gtau1", "2.0", "--n_f", "180",
             "--grid-step", "0.1"],
            tmp_path,
        )
        assert code == 0
        _assert_matches_golden(text, "qfunc_nbar100.csv")

    def test_single_spot_without_interaction(self, tmp_path):
        code, text = _run(
            ["qfunc", "--nbar", "100", "--gtau1", "0.0", "--n_f", "180",
             "--grid-step", "0.2"],
            tmp_path,
        )
        assert code == 0
        rows = _data_values(text)
        peak = rows[np.argmax(rows[:, 2])]
        assert abs(peak[0] - math.sqrt(200.0)) < 0.2 and abs(peak[1]) < 0.2
        header = _split(text)[0]
        integral = [l for l in header if "grid_integral" in l][0]
        assert float(integral.split("=")[1]) == pytest.approx(1.0, abs=1e-2)


class TestQuadDist:
    def test_matches_golden(self, tmp_path):
        code, text = _run(
            ["quad-dist", "--nbar", "100", "--gtau1", "2.0", "--n_f", "180",
             "--p-min", "-8", "--p-max", "8"],
            tmp_path,
        )
        assert code == 0
        _assert_matches_golden(text, "quad_dist_nbar100.csv")

    def test_gaussian_at_zero_interaction(self, tmp_path):
        code, text = _run(
            ["quad-dist", "--nbar", "25", "--gtau1", "0.0", "--n_f", "100",
             "--p-min", "-4", "--p-max", "4"],
            tmp_path,
        )
        assert code == 0
        rows = _data_values(text)
        assert np.abs(rows[:, 1] - np.pi**-0.5 * np.exp(-rows[:, 0] ** 2)).max() < 1e-7

    def test_header_window_integral_matches_success_probability(self, tmp_path):
        from cavpurify import evolve_sequential, success_probability

        code, text = _run(
            ["quad-dist", "--nbar", "100", "--gtau1", "2.0", "--n_f", "180"], tmp_path
        )
        assert code == 0
        header = _split(text)[0]
        got = float([l for l in header if "window_integral_P_H" in l][0].split("=")[1])
        state = evolve_sequential([1, 0, 0, 0], 10.0, 2.0, 2.0, 180)
        assert got == pytest.approx(success_probability(state, dp=0.01), abs=1e-12)


class TestFstarSweep:
    def test_matches_golden_and_figure_properties(self, tmp_path):
        code, text = _run(
            ["fstar-sweep", "--nbar-list", "10,50,100,200", "--gtau-min", "0.2",
             "--gtau-max", "4.0", "--gtau-step", "0.1", "--p", "0.0"],
            tmp_path,
        )
        assert code == 0
        _assert_matches_golden(text, "fstar_sweep.csv")
        rows = _data_values(text)
        assert np.all((rows[:, 2] >= 0.0) & (rows[:, 2] <= 1.0))
        for nbar in (10, 50, 100, 200):
            sub = rows[rows[:, 0] == nbar]
            peak_gtau = sub[np.argmax(sub[:, 2]), 1]
            assert 1.6 <= peak_gtau <= 2.4


class TestPurify:
    def test_ideal_aD_matches_golden(self, tmp_path):
        code, text = _run(
            ["purify", "--protocol", "aD", "--backend", "ideal",
             "--initial", "psi:0.7", "--iterations", "5"],
            tmp_path,
        )
        assert code == 0
        _assert_matches_golden(text, "purify_aD_ideal.csv")
        rows = _data_values(text)
        assert rows[4, 1] >= 0.999999
        assert rows[4, 3] == pytest.approx(2560.0, rel=1e-3)

    def test_kraus_backend_matches_golden(self, tmp_path):
        code, text = _run(
            ["purify", "--protocol", "aD", "--backend", "kraus",
             "--initial", "psi:0.7", "--iterations", "5",
             "--nbar", "50", "--gtau1", "2.0", "--gtau2", "2.2", "--p", "0.5",
             "--n_f", "112"],
            tmp_path,
        )
        assert code == 0
        _assert_matches_golden(text, "purify_aD_kraus_fig6.csv")

    def test_channel_file_backend(self, tmp_path):
        code = main(
            ["channel", "--nbar", "4", "--gtau1", "1.0", "--gtau_f", "0.5",
             "--n_f", "24", "--kappa", "0.02", "--gamma", "0.001",
             "--rtol", "1e-9", "--output", str(tmp_path / "chan.json")]
        )
        assert code == 0
        code, text = _run(
            ["purify", "--protocol", "aD", "--backend", "channel-file",
             "--channel-file", str(tmp_path / "chan.json"),
             "--initial", "psi:0.7", "--iterations", "3"],
            tmp_path,
        )
        assert code == 0
        rows = _data_values(text)
        assert rows.shape == (3, 4)
        assert np.all(rows[:, 2] > 0.0)

    def test_bad_initial_is_config_error(self, tmp_path):
        code, _ = _run(
            ["purify", "--protocol", "aD", "--initial", "nonsense:1"], tmp_path
        )
        assert code == 2

    def test_unreachable_target_is_numerical_failure(self, tmp_path):
        code, _ = _run(
            ["purify", "--protocol", "aB", "--initial", "werner:0.8",
             "--target", "0.9999999999"],
            tmp_path,
        )
        assert code == 3

    def test_invalid_weights_precondition(self, tmp_path):
        code, _ = _run(
            ["purify", "--protocol", "aD", "--initial", "bd:0.9,0.2,0.0,0.0"],
            tmp_path,
        )
        assert code == 4


class TestChannelCommand:
    def test_json_dump_and_validity(self, tmp_path):
        out = tmp_path / "chan.json"
        code = main(
            ["channel", "--nbar", "4", "--gtau1", "1.0", "--gtau_f", "0.5",
             "--n_f", "24", "--kappa", "0.02", "--gamma", "0.001",
             "--rtol", "1e-9", "--output", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["shape"] == [4, 4, 4, 4]
        assert payload["metadata"]["nbar"] == 4.0
        assert payload["validity"]["hermiticity_residual"] < 1e-9
        assert payload["validity"]["choi_min_eigenvalue"] > -1e-8
        entry = payload["entries"][0][0][0][0]
        assert set(entry) == {"re", "im"}
        chan = load_channel(out)
        assert chan.entries.shape == (4, 4, 4, 4)


class TestResources:
    def test_matches_golden_and_paper_count(self, tmp_path):
        code, text = _run(
            ["resources", "--protocol", "aD", "--F0", "0.7", "--target", "0.999999"],
            tmp_path,
        )
        assert code == 0
        _assert_matches_golden(text, "resources_aD.csv")
        rows = _data_values(text)
        assert rows[-1, 0] == 5
        assert rows[-1, 2] == pytest.approx(2560.0, rel=1e-3)

    def test_target_099_needs_three(self, tmp_path):
        code, text = _run(
            ["resources", "--protocol", "aD", "--F0", "0.7", "--target", "0.99"],
            tmp_path,
        )
        assert code == 0
        assert _data_values(text)[-1, 0] == 3


class TestConfigHandling:
    def test_file_merge_and_flag_priority(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# lossless quick run\n"
            "nbar = 25\n"
            "gtau1 = 1.5\n"
            "p = 0.3\n"
        )
        code, text = _run(
            ["purify", "--protocol", "aD", "--initial", "psi:0.7",
             "--iterations", "2", "--config", str(cfg), "--nbar", "36"],
            tmp_path,
        )
        assert code == 0
        header = _split(text)[0]
        assert any(l.strip() == "# nbar = 36.0" for l in header)
        assert any(l.strip() == "# gtau1 = 1.5" for l in header)

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("quux = 3\n")
        code, _ = _run(
            ["purify", "--protocol", "aD", "--initial", "psi:0.7",
             "--iterations", "1", "--config", str(cfg)],
            tmp_path,
        )
        assert code == 2

    def test_invalid_value_rejected(self, tmp_path):
        code, _ = _run(["quad-dist", "--nbar", "0.5"], tmp_path)
        assert code == 2

    def test_reruns_byte_identical(self, tmp_path):
        argv = ["purify", "--protocol", "aD", "--backend", "kraus",
                "--initial", "psi:0.7", "--iterations", "3",
                "--nbar", "25", "--n_f", "80"]
        _, first = _run(argv, tmp_path, name="a.csv")
        _, second = _run(argv, tmp_path, name="b.csv")
        # ignore the output-path echo, which legitimately differs
        strip = lambda text: [l for l in text.splitlines() if not l.startswith("# output")]
        assert strip(first) == strip(second)

    def test_truncation_failure_exit_code(self, tmp_path):
        code, _ = _run(["quad-dist", "--nbar", "100", "--n_f", "90"], tmp_path)
        assert code == 3
