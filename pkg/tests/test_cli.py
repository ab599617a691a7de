"""End-to-end tests of the command-line interface and its CSV contract."""

import math

import pytest

from noma_perf.analytic import (
    outage_direct_exact,
    outage_far_exact,
    outage_oma,
    throughput_direct,
)
from noma_perf.cli import CSV_COLUMNS, REPORT_COLUMNS, main
from noma_perf.configs import coop_preset, direct_preset, load_config_file, with_mu

HEADER = ",".join(CSV_COLUMNS)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def data_rows(out):
    lines = out.splitlines()
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    assert body[0] in (HEADER, ",".join(REPORT_COLUMNS))
    return body[1:]


def cells(row):
    return dict(zip(CSV_COLUMNS, row.split(",")))


class TestSweep:
    def test_default_direct_sweep_shape(self, capsys):
        code, out, err = run_cli(capsys, "sweep", "--scenario", "direct")
        assert code == 0 and err == ""
        rows = data_rows(out)
        assert len(rows) == 9 * 3  # 0..40 dB step 5, three served users
        first = cells(rows[0])
        assert first["snr_db"] == "0" and first["scenario"] == "direct"
        assert first["mu"] == "1" and first["user"] == "1"
        # no Monte Carlo requested: those columns stay empty
        assert first["p_mc"] == "" and first["mc_stderr"] == "" and first["p_oma"] == ""

    def test_cells_match_library_values(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "direct",
            "--snr-start", "10", "--snr-stop", "10", "--snr-step", "5",
            "--mu", "2", "--oma",
        )
        assert code == 0
        rows = data_rows(out)
        assert len(rows) == 3
        cfg = with_mu(direct_preset(), 2)
        rho = 10.0
        for row, user in zip(rows, (1, 2, 3)):
            c = cells(row)
            assert c["p_exact"] == f"{outage_direct_exact(cfg, rho, user):.12g}"
            assert c["p_oma"] == f"{outage_oma(cfg, rho):.12g}"
            assert c["throughput"] == f"{throughput_direct(cfg, rho):.12g}"

    def test_coop_rows_come_before_direct_in_compare(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "compare",
            "--snr-start", "20", "--snr-stop", "25", "--snr-step", "5",
        )
        assert code == 0
        scen = [cells(r)["scenario"] for r in data_rows(out)]
        assert scen == ["coop"] * 4 + ["direct"] * 4

    def test_mu_list_expands_rows(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "coop", "--mu", "1,2 3",
            "--snr-start", "10", "--snr-stop", "10", "--snr-step", "1",
        )
        assert code == 0
        mus = [cells(r)["mu"] for r in data_rows(out)]
        assert mus == ["1", "1", "2", "2", "3", "3"]

    def test_users_filter(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "coop", "--users", "far",
            "--snr-start", "10", "--snr-stop", "15", "--snr-step", "5",
        )
        assert code == 0
        users = [cells(r)["user"] for r in data_rows(out)]
        assert users == ["far", "far"]
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "direct", "--users", "1 3",
            "--snr-start", "10", "--snr-stop", "10", "--snr-step", "5",
        )
        assert code == 0
        assert [cells(r)["user"] for r in data_rows(out)] == ["1", "3"]

    def test_mc_columns_populate_and_no_mc_suppresses(self, capsys):
        args = (
            "sweep", "--scenario", "direct", "--trials", "20000",
            "--snr-start", "10", "--snr-stop", "10", "--snr-step", "5",
            "--users", "2",
        )
        code, out, _ = run_cli(capsys, *args)
        assert code == 0
        c = cells(data_rows(out)[0])
        assert c["p_mc"] != "" and c["mc_stderr"] != ""
        assert 0.0 <= float(c["p_mc"]) <= 1.0
        code, out, _ = run_cli(capsys, *args, "--no-mc")
        assert code == 0
        c = cells(data_rows(out)[0])
        assert c["p_mc"] == "" and c["mc_stderr"] == ""

    def test_out_writes_file_and_keeps_stdout_quiet(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "direct", "--out", str(target),
            "--snr-start", "0", "--snr-stop", "10", "--snr-step", "5",
        )
        assert code == 0 and out == ""
        text = target.read_text(encoding="utf-8")
        assert text.startswith(HEADER + "\n")
        assert len(text.splitlines()) == 1 + 3 * 3

    def test_custom_config_file(self, capsys, tmp_path):
        ini = tmp_path / "own.ini"
        ini.write_text(
            "[direct]\npower = 0.7 0.3\nrates = 0.5 1.0\nomega = 1.0 2.0\nmu = 2\n",
            encoding="utf-8",
        )
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "direct", "--config", str(ini),
            "--snr-start", "10", "--snr-stop", "10", "--snr-step", "5",
        )
        assert code == 0
        rows = data_rows(out)
        assert len(rows) == 2
        cfg = load_config_file(str(ini))["direct"]
        assert cells(rows[0])["p_exact"] == f"{outage_direct_exact(cfg, 10.0, 1):.12g}"

    def test_bad_flags_exit_2(self, capsys):
        assert run_cli(capsys, "sweep", "--mu", "0")[0] == 2
        assert run_cli(capsys, "sweep", "--mu", "x")[0] == 2
        assert run_cli(capsys, "sweep", "--snr-step", "-1")[0] == 2
        code, _, err = run_cli(
            capsys, "sweep", "--snr-start", "20", "--snr-stop", "10"
        )
        assert code == 2 and "error:" in err

    def test_missing_scenario_section_exits_2(self, capsys, tmp_path):
        ini = tmp_path / "cooponly.ini"
        ini.write_text("[coop]\nusers = 3\nnear_rank = 3\n", encoding="utf-8")
        code, _, err = run_cli(
            capsys, "sweep", "--scenario", "direct", "--config", str(ini)
        )
        assert code == 2 and "error:" in err


class TestFigure:
    def test_header_echoes_preset_values(self, capsys):
        code, out, _ = run_cli(capsys, "figure", "fig4")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "# figure = fig4"
        assert "# direct.power = 0.5 0.4 0.1" in lines
        assert "# direct.omega = 0.3 1.5 5" in lines
        assert "# direct.mu = 1" in lines
        rows = data_rows(out)
        assert len(rows) == 9 * 3
        assert all(cells(r)["mu"] == "1" for r in rows)

    def test_mu_schedule_per_figure(self, capsys):
        code, out, _ = run_cli(capsys, "figure", "fig3")
        assert code == 0
        mus = {cells(r)["mu"] for r in data_rows(out)}
        assert mus == {"2", "3"}
        code, out, _ = run_cli(capsys, "figure", "fig6")
        assert code == 0
        mus = {cells(r)["mu"] for r in data_rows(out)}
        assert mus == {"1", "2", "3"}

    def test_comparison_figure_covers_both_scenarios(self, capsys):
        code, out, _ = run_cli(capsys, "figure", "fig8")
        assert code == 0
        lines = out.splitlines()
        assert "# coop.users = 3" in lines
        assert "# direct.power = 0.8 0.2" in lines
        scen = {cells(r)["scenario"] for r in data_rows(out)}
        assert scen == {"coop", "direct"}

    def test_figure_rows_always_carry_oma_and_throughput(self, capsys):
        code, out, _ = run_cli(capsys, "figure", "fig2")
        assert code == 0
        for row in data_rows(out):
            c = cells(row)
            assert c["p_oma"] != "" and c["throughput"] != ""

    def test_throughput_grows_with_snr(self, capsys):
        code, out, _ = run_cli(capsys, "figure", "fig6")
        assert code == 0
        rows = [cells(r) for r in data_rows(out) if r.split(",")[2] == "1"]
        tput = [float(c["throughput"]) for c in rows if c["user"] == "far"]
        assert tput == sorted(tput)
        assert tput[-1] > tput[0]

    def test_unknown_figure_id_exits_2(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["figure", "fig99"])
        assert info.value.code == 2
        capsys.readouterr()


class TestValidate:
    def test_oracle_only_report_passes(self, capsys):
        code, out, err = run_cli(capsys, "validate", "--trials", "0")
        assert code == 0 and err == ""
        rows = data_rows(out)
        assert len(rows) == 9 * 2 + 9 * 3
        for row in rows:
            parts = row.split(",")
            assert parts[-2] == "pass"
            assert parts[7] == ""  # no simulation leg

    def test_report_written_to_file(self, capsys, tmp_path):
        target = tmp_path / "report.csv"
        code, out, _ = run_cli(capsys, "validate", "--trials", "0", "--out", str(target))
        assert code == 0 and out == ""
        text = target.read_text(encoding="utf-8")
        assert text.startswith(",".join(REPORT_COLUMNS) + "\n")

    def test_malformed_config_exits_2(self, capsys, tmp_path):
        ini = tmp_path / "broken.ini"
        ini.write_text("[direct]\npower = 0.5 0.6\nrates = 1.0 1.0\n", encoding="utf-8")
        code, _, err = run_cli(capsys, "validate", "--config", str(ini))
        assert code == 2
        assert "error:" in err


class TestDeterminism:
    ARGS = (
        "sweep", "--scenario", "compare", "--trials", "30000",
        "--snr-start", "10", "--snr-stop", "15", "--snr-step", "5",
        "--seed", "7",
    )

    def test_repeat_runs_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main([*self.ARGS, "--out", str(a)]) == 0
        assert main([*self.ARGS, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        capsys.readouterr()

    def test_chunks_do_not_change_output(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main([*self.ARGS, "--chunks", "1", "--out", str(a)]) == 0
        assert main([*self.ARGS, "--chunks", "3", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        capsys.readouterr()

    def test_seed_changes_mc_cells_only(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        base = list(self.ARGS)
        assert main([*base, "--out", str(a)]) == 0
        base[base.index("7")] = "8"
        assert main([*base, "--out", str(b)]) == 0
        rows_a = a.read_text(encoding="utf-8").splitlines()[1:]
        rows_b = b.read_text(encoding="utf-8").splitlines()[1:]
        assert rows_a != rows_b
        for ra, rb in zip(rows_a, rows_b):
            ca, cb = cells(ra), cells(rb)
            assert ca["p_exact"] == cb["p_exact"]
            assert ca["p_asymptotic"] == cb["p_asymptotic"]
            assert ca["throughput"] == cb["throughput"]
        capsys.readouterr()


class TestFormatting:
    def test_float_cells_use_twelve_significant_digits(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep", "--scenario", "coop",
            "--snr-start", "17", "--snr-stop", "17", "--snr-step", "1",
        )
        assert code == 0
        rho = 10.0 ** 1.7
        c = cells(data_rows(out)[0])
        value = outage_far_exact(coop_preset(), rho)
        assert c["p_exact"] == f"{value:.12g}"
        assert float(c["p_exact"]) == pytest.approx(value, rel=1e-11)

    def test_nan_free_output(self, capsys):
        code, out, _ = run_cli(capsys, "figure", "fig8")
        assert code == 0
        assert "nan" not in out and "inf" not in out
