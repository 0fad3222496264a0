import json

import pytest

from stokestab.cli import RunConfig, fmt, main, write_svg


def run_cli(args):
    return main(args)


def test_runconfig_roundtrip(tmp_path):
    cfg = RunConfig(h=2.5, eps=0.02, theta=0.1, K=24, Nx=48, Nz=80,
                    contour_nodes=128, tol=1e-10, outdir="out", fmt="json")
    path = tmp_path / "run.cfg"
    cfg.to_file(path)
    assert RunConfig.from_file(path) == cfg


def test_runconfig_rejects_unknown_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("h=1.0\nbogus=3\n")
    with pytest.raises(KeyError):
        RunConfig.from_file(path)


def test_runconfig_validation():
    with pytest.raises(ValueError):
        RunConfig(h=-1.0).validate()
    with pytest.raises(ValueError):
        RunConfig(fmt="xml").validate()


def test_float_format_17_digits():
    assert fmt(1.0 / 3.0) == "0.33333333333333331"


def test_resonance_single(capsys):
    assert run_cli(["resonance", "--h", "1"]) == 0
    out = capsys.readouterr().out
    assert "beta_star(1) = 1.07104795573757" in out


def test_resonance_deep(capsys):
    assert run_cli(["resonance", "--h", "50"]) == 0
    beta = float(capsys.readouterr().out.split("=")[1].split()[0])
    assert abs(beta - 2.7275) < 5e-4


def test_resonance_range_matches_scan(tmp_path, capsys):
    assert run_cli(["resonance", "--h-min", "0.5", "--h-max", "2.0",
                    "--points", "5", "--outdir", str(tmp_path)]) == 0
    capsys.readouterr()
    from stokestab.isola import default_h_grid, scan_h
    grid = default_h_grid(0.5, 2.0, 5)
    expected = {f"{h:.17g}": v for h, v, _ in scan_h(grid, "beta_star")}
    lines = (tmp_path / "resonance.csv").read_text().splitlines()
    assert lines[0] == "h,beta_star,asymptote"
    for line in lines[1:]:
        h_s, b_s, _ = line.split(",")
        assert float(b_s) == pytest.approx(expected[h_s], abs=1e-14)


def test_output_determinism(tmp_path, capsys):
    args = ["dno-dump", "--h", "1", "--kmin", "-2", "--kmax", "2",
            "--outdir", str(tmp_path)]
    assert run_cli(args) == 0
    first = (tmp_path / "dno.csv").read_bytes()
    assert run_cli(args) == 0
    assert (tmp_path / "dno.csv").read_bytes() == first
    capsys.readouterr()


def test_coeffs_json_keys(tmp_path, capsys):
    assert run_cli(["coeffs", "--h", "1", "--outdir", str(tmp_path)]) == 0
    capsys.readouterr()
    payload = json.loads((tmp_path / "coeffs.json").read_text())
    for key in ("h", "beta_star", "sigma", "a01", "a20", "a02", "a21", "a03",
                "c01", "c20", "c02", "c21", "c03", "b30",
                "c2", "eta20", "zeta11", "p11", "q20", "r33", "h2"):
        assert key in payload
    assert payload["q20"] == 1.0


def test_isola_outputs(tmp_path, capsys):
    assert run_cli(["isola", "--h", "1", "--eps", "0.01", "--samples", "9",
                    "--outdir", str(tmp_path)]) == 0
    capsys.readouterr()
    lines = (tmp_path / "isola.csv").read_text().splitlines()
    assert lines[0] == "theta,re_lambda,im_lambda,branch"
    assert len(lines) == 1 + 2 * 9
    geo = json.loads((tmp_path / "isola_geometry.json").read_text())
    assert geo["kappa1"] > 0.0
    svg = (tmp_path / "isola.svg").read_text()
    assert svg.startswith("<svg") and "path" in svg


def test_scan_csv_schema(tmp_path, capsys, monkeypatch):
    import stokestab.cli as cli_mod

    monkeypatch.setattr(cli_mod.isola, "default_h_grid",
                        lambda *a, **k: [0.5, 1.0])
    assert run_cli(["scan", "--quantity", "beta_star", "--h-min", "0.5",
                    "--h-max", "1.0", "--points", "2",
                    "--outdir", str(tmp_path)]) == 0
    capsys.readouterr()
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == "h,value,failure"
    assert len(lines) == 3
    assert all(line.endswith(",") for line in lines[1:])  # empty failure col


def test_validate_command(tmp_path, capsys):
    assert run_cli(["validate", "--h", "1", "--eps", "0.01", "--K", "20",
                    "--thetas", "3", "--outdir", str(tmp_path)]) == 0
    capsys.readouterr()
    summary = json.loads((tmp_path / "validate_summary.json").read_text())
    assert summary["max_distance"] < 1e-6
    lines = (tmp_path / "validate.csv").read_text().splitlines()
    assert lines[0] == "theta,pred_re,pred_im,num_re,num_im,dist"
    assert len(lines) == 4


def test_hcrit_command(tmp_path, capsys):
    assert run_cli(["hcrit", "--lo", "0.24", "--hi", "0.26", "--tol", "1e-3",
                    "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "h_crit" in out
    payload = json.loads((tmp_path / "hcrit.json").read_text())
    assert abs(payload["h_crit"] - 0.2506) < 2e-3


def test_seed_check_pass(capsys):
    assert run_cli(["resonance", "--h", "1", "--seed-check"]) == 0
    out = capsys.readouterr().out
    assert "seed-check:" in out and " 0 failed" in out


def test_seed_check_all_modules(capsys):
    for cmd in (["coeffs", "--h", "1"], ["dno-dump", "--h", "1"],
                ["isola", "--h", "1"]):
        assert run_cli(cmd + ["--seed-check"]) == 0
        out = capsys.readouterr().out
        assert " 0 failed" in out


def test_error_exit_code(capsys):
    assert run_cli(["resonance", "--h", "-3"]) == 1
    assert "error:" in capsys.readouterr().err


def test_svg_writer(tmp_path):
    path = tmp_path / "plot.svg"
    write_svg(path, [("curve", [(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)])])
    body = path.read_text()
    assert body.startswith("<svg")
    assert body.rstrip().endswith("</svg>")


def test_thread_cap_env(monkeypatch):
    from stokestab.cli import thread_cap
    monkeypatch.setenv("STOKES_ISOLA_THREADS", "4")
    assert thread_cap() == 4
    monkeypatch.setenv("STOKES_ISOLA_THREADS", "junk")
    assert thread_cap() == 1
