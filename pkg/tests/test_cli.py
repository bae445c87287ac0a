"""Command-line layer: flag parsing, config precedence, end-to-end runs."""

from pathlib import Path

import pytest

from tnvqe.cli import (
    _parse_chi,
    _parse_chi_list,
    _parse_floats,
    _parse_pattern,
    build_parser,
    main,
    resolve_config,
)


class TestParsers:
    def test_parse_chi_scalar_and_ladder(self):
        assert _parse_chi("2") == 2
        assert _parse_chi("2,4,16") == (2, 4, 16)
        assert _parse_chi("2-4-16") == (2, 4, 16)

    def test_parse_chi_list(self):
        assert _parse_chi_list("2-2-2,2-4-8") == ((2, 2, 2), (2, 4, 8))
        assert _parse_chi_list("2-4") == ((2, 4),)

    def test_parse_floats(self):
        assert _parse_floats("0.0,2.0,3.5") == (0.0, 2.0, 3.5)

    def test_parse_pattern(self):
        assert _parse_pattern("branch2") == "branch2"
        assert _parse_pattern("none") is None
        assert _parse_pattern("BINARY") is None


class TestResolution:
    def test_flags_override_config_file(self, tmp_path):
        cfgfile = tmp_path / "cfg.txt"
        cfgfile.write_text("model = xyz\nsites = 8\nseed = 7\n")
        args = build_parser().parse_args(
            ["eevqe", "--config", str(cfgfile), "--sites", "4"]
        )
        cfg = resolve_config(args)
        assert cfg.sites == 4  # flag wins
        assert cfg.model == "xyz"  # file fills what flags leave unset
        assert cfg.seed == 7
        assert cfg.realizations == 10  # untouched default

    def test_plain_mean_flag(self):
        args = build_parser().parse_args(["eevqe", "--plain-mean"])
        assert resolve_config(args).aggregate == "plain"
        args = build_parser().parse_args(["eevqe"])
        assert resolve_config(args).aggregate == "log10"

    def test_unknown_command_exits(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["frobnicate"])
        capsys.readouterr()

    def test_command_required(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])
        capsys.readouterr()


class TestMain:
    def test_exact_end_to_end(self, tmp_path, capsys):
        rc = main(
            [
                "exact",
                "--model", "heisenberg",
                "--sites", "4",
                "--realizations", "2",
                "--seed", "30",
                "--out", str(tmp_path / "runs"),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "heisenberg_N4_s30: E_exact = " in out
        assert "heisenberg_N4_s31: E_exact = " in out
        assert (tmp_path / "runs" / "exact.csv").exists()

    def test_eevqe_end_to_end(self, tmp_path, capsys):
        rc = main(
            [
                "eevqe",
                "--sites", "4",
                "--realizations", "1",
                "--mera-iters", "2",
                "--vqe-iters", "2",
                "--out", str(tmp_path / "runs"),
            ]
        )
        assert rc == 0
        assert "eevqe: 1 realization(s)" in capsys.readouterr().out
        assert (tmp_path / "runs" / "eevqe" / "curves.csv").exists()
        assert (tmp_path / "runs" / "eevqe" / "r000.csv").exists()

    def test_chi_sweep_end_to_end(self, tmp_path, capsys):
        rc = main(
            [
                "chi-sweep",
                "--sites", "4",
                "--realizations", "1",
                "--mera-iters", "1",
                "--chi-list", "2-2,2-4",
                "--out", str(tmp_path / "runs"),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "chi_2-2/ev" in out
        assert "chi_2-4/modified_ev" in out
