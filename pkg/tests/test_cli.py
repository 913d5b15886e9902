import json

import numpy as np
import pytest

from shiftortho import (
    CoeffTensor,
    LatticeDomain,
    SopwBasis1D,
    flatten,
    project_sso,
    random_tensor,
    sopw_fourier_coeffs,
)
from shiftortho.cli import main
from shiftortho.coeffio import (
    CoeffFileError,
    read_coeff_file,
    read_sopw_table,
    write_coeff_file,
)
from util import random_real_tensor

pytestmark = pytest.mark.filterwarnings(
    "ignore:basis analysis truncated:RuntimeWarning"
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    status = None
    for line in captured.out.splitlines():
        line = line.strip()
        if line.startswith("{"):
            status = json.loads(line)
    return code, status, captured


class TestCoeffFile:
    def test_read_write_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        for shifts, depths in (((4,), (3,)), ((2, 3), (2, 2))):
            dom = LatticeDomain(shifts, depths)
            tensor = random_tensor(dom, rng)
            path = tmp_path / "t.csv"
            write_coeff_file(path, tensor)
            back = read_coeff_file(path)
            assert back.domain == dom
            assert np.array_equal(back.data, tensor.data)

    def test_write_read_write_byte_identical(self, tmp_path):
        rng = np.random.default_rng(1)
        tensor = random_tensor(LatticeDomain((3,), (4,)), rng)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_coeff_file(first, tensor)
        write_coeff_file(second, read_coeff_file(first))
        assert first.read_bytes() == second.read_bytes()

    def test_real_kind_detection(self, tmp_path):
        rng = np.random.default_rng(2)
        tensor = random_real_tensor(LatticeDomain((4,), (2,)), rng)
        path = tmp_path / "r.csv"
        write_coeff_file(path, tensor)
        header = json.loads(path.read_text().splitlines()[0])
        assert header["kind"] == "real"

    def test_parse_error_carries_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            '{"schema": 1, "d": 1, "L": [2], "N": [1], "kind": "real"}\n'
            "1,0,0.0,0.0\n"
            "1,1,not-a-number,0.0\n"
        )
        with pytest.raises(CoeffFileError) as info:
            read_coeff_file(path)
        assert info.value.row == 3

    def test_wrong_row_count(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text(
            '{"schema": 1, "d": 1, "L": [2], "N": [1], "kind": "real"}\n'
            "1,0,1.0,0.0\n"
        )
        with pytest.raises(CoeffFileError):
            read_coeff_file(path)

    def test_duplicate_row(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text(
            '{"schema": 1, "d": 1, "L": [2], "N": [1], "kind": "real"}\n'
            "1,0,1.0,0.0\n"
            "1,0,2.0,0.0\n"
        )
        with pytest.raises(CoeffFileError) as info:
            read_coeff_file(path)
        assert info.value.row == 3

    def test_out_of_range_index(self, tmp_path):
        path = tmp_path / "range.csv"
        path.write_text(
            '{"schema": 1, "d": 1, "L": [2], "N": [1], "kind": "real"}\n'
            "1,0,1.0,0.0\n"
            "1,2,2.0,0.0\n"
        )
        with pytest.raises(CoeffFileError):
            read_coeff_file(path)


class TestProjectCommand:
    def test_member_passes_through(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        dom = LatticeDomain((4,), (3,))
        member = project_sso(random_tensor(dom, rng))
        source = tmp_path / "in.csv"
        target = tmp_path / "out.csv"
        write_coeff_file(source, member)
        code, status, _ = run_cli(capsys, "project", str(source), str(target))
        assert code == 0
        assert status["is_member"]
        out = read_coeff_file(target)
        assert np.abs(out.data - member.data).max() <= 1e-12

    def test_random_input_projects(self, tmp_path, capsys):
        rng = np.random.default_rng(4)
        dom = LatticeDomain((3, 2), (2, 2))
        source = tmp_path / "in.csv"
        target = tmp_path / "out.csv"
        write_coeff_file(source, random_tensor(dom, rng))
        code, status, _ = run_cli(capsys, "project", str(source), str(target))
        assert code == 0
        assert status["max_violation"] <= 1e-10
        assert abs(status["norm_min"] - 1.0) <= 1e-10
        assert abs(status["norm_max"] - 1.0) <= 1e-10

    def test_deflation_modes(self, tmp_path, capsys):
        rng = np.random.default_rng(5)
        dom = LatticeDomain((4,), (3,))
        mode = project_sso(random_real_tensor(dom, rng))
        mode_path = tmp_path / "mode.csv"
        write_coeff_file(mode_path, mode)
        source = tmp_path / "in.csv"
        target = tmp_path / "out.csv"
        write_coeff_file(source, random_tensor(dom, rng))
        code, status, _ = run_cli(
            capsys, "project", str(source), str(target), "--modes", str(mode_path)
        )
        assert code == 0
        assert status["modes"] == 1
        assert status["max_violation"] <= 1e-10

    def test_too_many_modes_exit_2(self, tmp_path, capsys):
        rng = np.random.default_rng(6)
        dom = LatticeDomain((4,), (2,))
        modes = []
        from shiftortho import project_sso_orth

        for _ in range(2):
            modes.append(project_sso_orth(random_real_tensor(dom, rng), modes))
        paths = []
        for index, mode in enumerate(modes):
            path = tmp_path / f"m{index}.csv"
            write_coeff_file(path, mode)
            paths.append(str(path))
        source = tmp_path / "in.csv"
        write_coeff_file(source, random_tensor(dom, rng))
        code, _, captured = run_cli(
            capsys, "project", str(source), str(tmp_path / "out.csv"),
            "--modes", *paths,
        )
        assert code == 2
        assert "modes" in captured.err

    def test_malformed_file_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("not json\n")
        code, _, _ = run_cli(capsys, "project", str(bad), str(tmp_path / "o.csv"))
        assert code == 1

    def test_domain_mismatch_exit_2(self, tmp_path, capsys):
        rng = np.random.default_rng(7)
        source = tmp_path / "in.csv"
        mode_path = tmp_path / "m.csv"
        write_coeff_file(source, random_tensor(LatticeDomain((4,), (2,)), rng))
        write_coeff_file(
            mode_path, project_sso(random_tensor(LatticeDomain((4,), (3,)), rng))
        )
        code, _, _ = run_cli(
            capsys, "project", str(source), str(tmp_path / "o.csv"),
            "--modes", str(mode_path),
        )
        assert code == 2


class TestSopwCommand:
    def test_table_round_trip(self, tmp_path, capsys):
        table_path = tmp_path / "table.csv"
        code, _, _ = run_cli(
            capsys, "sopw", "--L", "8", "--N", "4", "--table", str(table_path)
        )
        assert code == 0
        num_shifts, depth_cap, table = read_sopw_table(table_path)
        basis = SopwBasis1D(num_shifts, depth_cap)
        assert (num_shifts, depth_cap) == (8, 4)
        for k in range(1, 5):
            for j in range(8):
                assert table[(k, j)] == sopw_fourier_coeffs(k, j, basis)

    def test_plot_panels(self, tmp_path, capsys):
        plot_path = tmp_path / "fig.svg"
        code, status, _ = run_cli(
            capsys, "sopw", "--L", "8", "--N", "6", "--plot", str(plot_path),
            "--grid", "256",
        )
        assert code == 0
        body = plot_path.read_text()
        assert body.count("<polyline") == 6
        assert "nan" not in body.lower()
        # dominant oscillation frequency increases with the panel depth
        basis = SopwBasis1D(8, 6)
        from shiftortho import synthesize_grid

        dominant = []
        for k in range(1, 7):
            tensor = CoeffTensor.zeros(basis.domain)
            tensor.data[flatten(basis.domain, (k,), (4,))] = 1.0
            samples = synthesize_grid(tensor, 256, basis).real
            spectrum = np.abs(np.fft.rfft(samples))
            spectrum[0] = 0.0
            dominant.append(int(np.argmax(spectrum)))
        assert dominant == sorted(dominant)
        assert dominant[0] < dominant[-1]

    def test_odd_shift_count_exit_2(self, tmp_path, capsys):
        code, _, captured = run_cli(
            capsys, "sopw", "--L", "7", "--table", str(tmp_path / "t.csv")
        )
        assert code == 2
        assert "even" in captured.err


class TestCpwCommand:
    def test_small_run_artifacts(self, tmp_path, capsys):
        outdir = tmp_path / "run"
        code, status, _ = run_cli(
            capsys, "cpw", "--L", "8", "--N", "4", "--modes", "2",
            "--grid", "128", "--outdir", str(outdir),
        )
        assert code == 0
        assert status["all_converged"]
        assert status["max_cross_violation"] <= 1e-7
        for index in (1, 2):
            assert (outdir / f"mode{index}_samples.csv").exists()
            back = read_coeff_file(outdir / f"mode{index}_coeffs.csv")
            assert back.domain == SopwBasis1D(8, 4).domain
        assert (outdir / "modes.svg").exists()
        timing = (outdir / "timings.csv").read_text().splitlines()
        assert timing[0] == "mode,iterations,seconds"
        assert timing[-1].startswith("total,")
        assert len(timing) == 1 + 2 + 1  # header + one row per mode + total

    def test_non_convergence_exit_3(self, tmp_path, capsys):
        outdir = tmp_path / "run"
        code, status, _ = run_cli(
            capsys, "cpw", "--L", "8", "--N", "4", "--modes", "1",
            "--grid", "128", "--max-iter", "3", "--outdir", str(outdir),
        )
        assert code == 3
        assert not status["all_converged"]
        # artifacts still written
        assert (outdir / "mode1_samples.csv").exists()
        assert (outdir / "timings.csv").exists()

    def test_infeasible_mode_count_exit_2(self, tmp_path, capsys):
        code, _, _ = run_cli(
            capsys, "cpw", "--L", "8", "--N", "2", "--modes", "3",
            "--grid", "64", "--outdir", str(tmp_path / "run"),
        )
        assert code == 2

    def test_mu_inf_matches_generator_energy(self, tmp_path, capsys):
        from util import theta_energy

        code, status, _ = run_cli(
            capsys, "cpw", "--L", "8", "--N", "8", "--mu", "inf", "--modes", "1",
            "--grid", "256", "--outdir", str(tmp_path / "run"),
        )
        assert code == 0
        reference = theta_energy(SopwBasis1D(8, 8))
        energy = status["modes"][0]["energy"]
        assert abs(energy - reference) / reference <= 1e-4

    def test_deterministic_given_seed(self, tmp_path, capsys):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for outdir in (out_a, out_b):
            code, _, _ = run_cli(
                capsys, "cpw", "--L", "8", "--N", "4", "--modes", "1",
                "--grid", "128", "--init", "random", "--seed", "9",
                "--outdir", str(outdir),
            )
            assert code == 0
        assert (out_a / "mode1_samples.csv").read_bytes() == (
            out_b / "mode1_samples.csv"
        ).read_bytes()


class TestBenchCommand:
    def test_small_run(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code, status, captured = run_cli(
            capsys, "bench", "--min-exp", "10", "--max-exp", "12",
            "--repeats", "1", "--out", str(out),
        )
        assert code in (0, 3)  # tiny sizes are timing-noise dominated
        assert "noisy" in captured.err
        report = json.loads(out.read_text())
        assert {s["label"] for s in report["sections"]} == {
            "shift-scaling", "depth-scaling",
        }
        for section in report["sections"]:
            sizes = [row["size"] for row in section["rows"]]
            assert sizes == sorted(sizes)
            assert all(row["repeats"] == 1 for row in section["rows"])


class TestCertifyCommand:
    def test_pass(self, capsys):
        code, status, _ = run_cli(capsys, "certify", "--L", "4")
        assert code == 0
        assert status["all_passed"]

    def test_odd_shift_count(self, capsys):
        code, _, _ = run_cli(capsys, "certify", "--L", "5")
        assert code == 2


class TestUsage:
    def test_unknown_command_exit_1(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_missing_required_exit_1(self, capsys):
        assert main(["sopw"]) == 1

    def test_module_entrypoint(self, tmp_path):
        import subprocess
        import sys

        result = subprocess.run(
            [sys.executable, "-m", "shiftortho", "certify", "--L", "4"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert json.loads(result.stdout.splitlines()[-1])["all_passed"]
