import math

import pytest

from symdist import cli, sweep
from symdist.boxes import box_to_json, golden_box
from symdist.sweep import SweepSpec, parse_csv, run_sweep, to_svg


def _monotone_nonincreasing(col, slack=1e-6):
    prev = math.inf
    for v in col:
        if math.isinf(v) and v > 0:
            prev = math.inf
            continue
        assert v <= prev + slack
        prev = v
    return True


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(family="nope", start=0, stop=1)
    with pytest.raises(ValueError):
        SweepSpec(family="gad-gamma", start=0, stop=1, steps=1)
    with pytest.raises(ValueError):
        SweepSpec(family="gad-gamma", start=0, stop=1, quantities=("bogus",))


def test_gad_gamma_sweep_endpoints():
    spec = SweepSpec(family="gad-gamma", start=0.0, stop=1.0, steps=5,
                     N=0.1, q=1 / 3)
    res = run_sweep(spec)
    assert res.header == ["gamma", "xi_min", "xi_max", "sd", "xi_max_star"]
    assert len(res.rows) == 5
    first, last = res.rows[0], res.rows[-1]
    # gamma = 0: identity channel leaves orthogonal pure states
    assert all(math.isinf(v) for v in first[1:])
    # gamma = 1: both branch states collapse to diag(0.9, 0.1)
    assert last[1] == pytest.approx(0.0, abs=1e-6)
    assert last[2] == pytest.approx(0.0, abs=1e-6)
    assert last[3] == pytest.approx(math.log2(1.5), abs=1e-6)
    assert last[4] == pytest.approx(math.log2(1.5), abs=1e-6)
    for name in res.header[1:]:
        _monotone_nonincreasing(res.column(name))


def test_gad_phi_sweep_monotone():
    spec = SweepSpec(family="gad-phi", start=0.0, stop=math.pi / 2, steps=5,
                     gamma=0.25, N=0.1, q=1 / 3)
    res = run_sweep(spec)
    for name in res.header[1:]:
        _monotone_nonincreasing(res.column(name))


def test_csv_round_trip():
    spec = SweepSpec(family="gad-gamma", start=0.0, stop=1.0, steps=3,
                     quantities=("sd", "xi_max_star"))
    res = run_sweep(spec)
    back = parse_csv(res.to_csv())
    assert back.header == res.header
    for a, b in zip(back.rows, res.rows):
        assert a == b  # 17-digit serialization is exact for doubles


def test_worker_pool_matches_serial():
    spec = SweepSpec(family="gad-gamma", start=0.2, stop=0.8, steps=4,
                     quantities=("sd",))
    serial = run_sweep(spec, jobs=1)
    pooled = run_sweep(spec, jobs=2)
    assert serial.rows == pooled.rows


def test_svg_output():
    spec = SweepSpec(family="gad-gamma", start=0.1, stop=1.0, steps=4,
                     quantities=("sd",))
    svg = to_svg(run_sweep(spec))
    assert svg.startswith("<svg")
    assert "polyline" in svg


def test_cli_golden_values(capsys):
    assert cli.main(["sd", "--golden", "4,0.5"]) == 0
    assert capsys.readouterr().out.strip() == "2"
    assert cli.main(["perr", "--golden", "4,0.5"]) == 0
    assert capsys.readouterr().out.strip() == "0.125"
    assert cli.main(["chernoff", "--golden", "1,0.5"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.0, abs=1e-9)


def test_cli_box_files(tmp_path, capsys):
    src = tmp_path / "g2.json"
    tgt = tmp_path / "g4.json"
    src.write_text(box_to_json(golden_box(2, 0.5)))
    tgt.write_text(box_to_json(golden_box(4, 0.5)))
    assert cli.main(["distill", str(src), "--regime", "cds"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-9)
    assert cli.main(["dilute", str(src), "--regime", "cds"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-9)
    assert cli.main(["convert", str(src), str(tgt), "--regime", "cds"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-6)
    assert cli.main(["rates", str(src)]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0].startswith("distill ")


def test_cli_error_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 0.5, "rho0": [[1, 0]], "rho1": [[[1, 0]]]}')
    assert cli.main(["perr", str(bad)]) == 2
    assert "rho0" in capsys.readouterr().err
    assert cli.main(["sd", "--golden", "nonsense"]) == 2
    capsys.readouterr()
    assert cli.main(["perr", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()


def test_cli_sweep_writes_csv_and_svg(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    svg = tmp_path / "fig.svg"
    rc = cli.main(["sweep", "--family", "gad-gamma", "--steps", "3",
                   "--quantities", "sd,xi_max_star", "--out", str(out),
                   "--svg", str(svg)])
    assert rc == 0
    capsys.readouterr()
    parsed = parse_csv(out.read_text())
    assert parsed.header == ["gamma", "sd", "xi_max_star"]
    assert len(parsed.rows) == 3
    assert svg.read_text().startswith("<svg")


def test_serialization_of_inf_and_nan():
    row = sweep._serialize
    assert row(math.inf) == "inf"
    assert row(-math.inf) == "-inf"
    assert row(math.nan) == "nan"
    assert float(row(1 / 3)) == 1 / 3
