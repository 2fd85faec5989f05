import json
import subprocess
import sys

import pytest

from thermaldj.cli import main, parse_state_literal
from thermaldj.config import ConfigError, parse_spin_system

import reference as ref
from test_spin_algebra import assert_terms

GLYCINE_TEXT = """
[spins]
1  0.0      C
2  -12231.0 C
3  0.0      F
4  0.0      N

[couplings]
1 2  65.2
1 3  366.0
2 3  67.7
2 4  13.5

[grid]
delta_us 81.75
"""


class TestConfigParsing:
    def test_glycine_round_trip(self):
        cfg = parse_spin_system(GLYCINE_TEXT)
        sys4 = cfg.system
        assert sys4.nspins == 4
        assert sys4.labels == ("1", "2", "3", "4")
        assert sys4.offsets[1] == pytest.approx(-12231.0)
        assert sys4.j(1, 3) == pytest.approx(366.0)
        assert sys4.j(3, 4) == 0.0
        assert sys4.channels == ("C", "C", "F", "N")
        assert cfg.grid_delta_us == pytest.approx(81.75)
        assert cfg.grid_delta_s == pytest.approx(81.75e-6)

    def test_grid_section_optional(self):
        cfg = parse_spin_system("[spins]\na 0.0\n")
        assert cfg.grid_delta_us is None

    def test_comments_and_blank_lines_ignored(self):
        cfg = parse_spin_system("# header\n[spins]\n\n1 0.0  # inline\n")
        assert cfg.system.nspins == 1

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("[nuclei]\n1 0.0\n", "unknown section"),
            ("1 0.0\n", "before the first section"),
            ("[spins]\n1 0.0\n1 5.0\n", "duplicate spin label"),
            ("[spins]\n1 zero\n", "bad offset"),
            ("[spins]\n1 0.0 C extra\n", "spin lines are"),
            ("[spins]\n1 0.0\n[couplings]\n1 9 3.0\n", "unknown spin"),
            ("[spins]\n1 0.0\n2 0.0\n[couplings]\n1 2 3.0\n1 2 4.0\n", "duplicate coupling"),
            ("[spins]\n1 0.0\n[grid]\nspacing 2\n", "grid section takes"),
            ("[spins]\n1 0.0\n[grid]\ndelta_us -3\n", "must be positive"),
            ("", "no spins"),
        ],
    )
    def test_malformed_configs_rejected(self, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_spin_system(text)


class TestStateLiterals:
    def test_single_product(self):
        assert_terms(parse_state_literal("2*I1x*I4z", 4), {"XEEZ": 2.0})

    def test_sum_with_signs(self):
        assert_terms(
            parse_state_literal("2*I1x*I2z - 0.5*I1y", 4),
            {"XZEE": 2.0, "YEEE": -0.5},
        )

    def test_bare_operator(self):
        assert_terms(parse_state_literal("I1x", 4), {"XEEE": 1.0})

    @pytest.mark.parametrize(
        "text", ["2*", "I9x", "I1x*I1z", "3.0", "I1q", ""]
    )
    def test_bad_literals_rejected(self, text):
        from thermaldj.cli import CliError

        with pytest.raises(CliError):
            parse_state_literal(text, 4)


class TestCliDj:
    def test_constant_zero(self, capsys):
        code = main(["dj", "--function", "0"])
        out = capsys.readouterr().out
        assert code == 0
        assert "decision:     constant-0" in out
        assert "expectation:  0.25" in out

    def test_balanced(self, capsys):
        code = main(["dj", "--function", "x2*x3 ^ x4"])
        out = capsys.readouterr().out
        assert code == 0
        assert "decision:     balanced" in out

    def test_indeterminate_exit_code(self, capsys):
        code = main(["dj", "--table", "00000001"])
        assert code == 2

    def test_parse_error_exit_code(self, capsys):
        code = main(["dj", "--function", "x2 ^"])
        err = capsys.readouterr().err
        assert code == 1
        assert "position" in err

    def test_machine_output_is_deterministic_json(self, capsys):
        main(["dj", "--function", "x2*x3 ^ x4", "--machine-output"])
        first = capsys.readouterr().out
        main(["dj", "--function", "x2*x3 ^ x4", "--machine-output"])
        second = capsys.readouterr().out
        assert first == second
        payload = json.loads(first)
        assert payload["decision"] == "balanced"
        assert payload["table"] == "01010110"
        assert abs(payload["expectation"]) < 1e-10
        coeffs = {t["axes"]: t["coeff"] for t in payload["rho2_terms"]}
        assert coeffs == pytest.approx(ref.RHO_B_PRIME)

    def test_custom_config(self, tmp_path, capsys):
        path = tmp_path / "two_spin.cfg"
        path.write_text("[spins]\na 0.0\nb 0.0\n[couplings]\na b 10.0\n")
        code = main(["dj", "--config", str(path), "--function", "x2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "balanced" in out

    def test_function_and_table_conflict(self, capsys):
        code = main(["dj", "--function", "0", "--table", "00000000"])
        assert code == 1


class TestCliCompile:
    def test_balanced_function_compiles_and_verifies(self, tmp_path, capsys):
        out_path = tmp_path / "program.txt"
        code = main(
            [
                "compile",
                "--function",
                "x2*x3 ^ x4",
                "--out",
                str(out_path),
                "--machine-output",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["verification_passed"] is True
        assert payload["verification_distance"] < 1e-9
        assert payload["events"] > 0
        assert 0.06 < payload["total_duration_s"] < 0.11
        text = out_path.read_text()
        assert text.count("DELAY") >= 5

    def test_constant_zero_gives_empty_program(self, tmp_path, capsys):
        out_path = tmp_path / "empty.txt"
        code = main(
            ["compile", "--function", "0", "--out", str(out_path), "--machine-output"]
        )
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["events"] == 0
        assert payload["total_duration_s"] == 0.0

    def test_grid_mode_reports_rounding(self, tmp_path, capsys):
        code = main(
            [
                "compile",
                "--function",
                "x2*x3 ^ x4",
                "--grid",
                "--out",
                str(tmp_path / "g.txt"),
                "--machine-output",
            ]
        )
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["grid_delta_us"] == pytest.approx(81.75)
        assert payload["grid_distance"] > 1e-9  # rounding is a real error

    def test_weight_four_function_fails_cleanly(self, tmp_path, capsys):
        code = main(
            [
                "compile",
                "--table",
                "00000001",
                "--out",
                str(tmp_path / "x.txt"),
            ]
        )
        err = capsys.readouterr().err
        assert code == 1
        assert "I1zI2zI3zI4z" in err

    def test_principal_branch_needs_full_weight(self, tmp_path, capsys):
        code = main(
            [
                "compile",
                "--function",
                "x2*x3 ^ x4",
                "--branch",
                "principal",
                "--out",
                str(tmp_path / "p.txt"),
            ]
        )
        assert code == 1  # the principal branch carries a weight-4 term

    def test_serialized_program_is_deterministic(self, tmp_path):
        paths = []
        for name in ("a.txt", "b.txt"):
            out_path = tmp_path / name
            assert (
                main(
                    ["compile", "--function", "x2*x3 ^ x4", "--out", str(out_path)]
                )
                == 0
            )
            paths.append(out_path.read_bytes())
        assert paths[0] == paths[1]


class TestCliSpectrum:
    def test_constant_function_flat_multiplet(self, tmp_path, capsys):
        code = main(
            [
                "spectrum",
                "--function",
                "0",
                "--detect",
                "1",
                "--out",
                str(tmp_path / "f0"),
                "--machine-output",
            ]
        )
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["ratio"] == "1:1:1:1"
        assert (tmp_path / "f0.dat").exists()
        assert (tmp_path / "f0.png").exists()

    def test_balanced_function_silent(self, tmp_path, capsys):
        code = main(
            [
                "spectrum",
                "--function",
                "x2*x3 ^ x4",
                "--detect",
                "1",
                "--out",
                str(tmp_path / "fb"),
                "--machine-output",
            ]
        )
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["ratio"] == "0:0:0:0"

    def test_literal_with_readout_pulse(self, tmp_path, capsys):
        code = main(
            [
                "spectrum",
                "--function",
                "x2*x3 ^ x4",
                "--state",
                "4*I1z*I2z*I3z",
                "--readout-y",
                "--detect",
                "1",
                "--out",
                str(tmp_path / "ctrl"),
                "--machine-output",
            ]
        )
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["ratio"] == "1:-1:-1:1"

    def test_literal_only(self, tmp_path, capsys):
        code = main(
            [
                "spectrum",
                "--state",
                "2*I1x*I3z",
                "--detect",
                "1",
                "--out",
                str(tmp_path / "lit"),
                "--machine-output",
            ]
        )
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["ratio"] == "-1:-1:1:1"

    def test_table_file_is_two_columns(self, tmp_path, capsys):
        main(
            [
                "spectrum",
                "--state",
                "I1x",
                "--detect",
                "1",
                "--out",
                str(tmp_path / "t"),
            ]
        )
        capsys.readouterr()
        rows = (tmp_path / "t.dat").read_text().strip().splitlines()
        assert rows[0].startswith("#")
        assert all(len(r.split("\t")) == 2 for r in rows[1:])

    def test_unknown_detect_label(self, tmp_path, capsys):
        code = main(
            ["spectrum", "--state", "I1x", "--detect", "q", "--out", str(tmp_path / "x")]
        )
        assert code == 1

    def test_missing_state_and_function(self, tmp_path, capsys):
        code = main(["spectrum", "--detect", "1", "--out", str(tmp_path / "x")])
        assert code == 1


class TestCliSweep:
    def test_n1_counts(self, capsys):
        code = main(["sweep", "1", "--machine-output"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["tables"] == 4
        assert payload["counts"]["constant-0"] == 1
        assert payload["counts"]["constant-1"] == 1
        assert payload["counts"]["balanced"] == 2
        assert payload["counts"]["indeterminate"] == 0
        assert payload["mismatches"] == 0

    def test_n2_counts(self, capsys):
        code = main(["sweep", "2", "--machine-output"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["counts"]["balanced"] == 6
        assert payload["counts"]["indeterminate"] == 8
        assert payload["max_deviation"] < 1e-10

    def test_out_of_range_rejected(self, capsys):
        assert main(["sweep", "5"]) == 1


class TestConsoleScript:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "thermaldj", "dj", "--function", "0"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "constant-0" in proc.stdout
