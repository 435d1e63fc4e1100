import json

import numpy as np
import pytest

from ppacf.cli import AnalysisConfig, cli_main
from ppacf.errors import ConfigError


@pytest.fixture
def ar_events(tmp_path):
    path = tmp_path / "ar.csv"
    assert cli_main(["simulate", "--family", "ar1", "--a", "0.75", "--n", "400",
                     "--seed", "5", "--out", str(path)]) == 0
    return path


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_oracle_ar1(tmp_path, capsys):
    assert cli_main(["oracle", "--family", "ar1", "--a", "0.5", "--max-lag", "3"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "lag,rho_tilde"
    assert [float(r.split(",")[1]) for r in rows[1:]] == [0.5, 0.25, 0.125]


def test_oracle_params_and_bins(tmp_path):
    out = tmp_path / "o.csv"
    assert cli_main(["oracle", "--family", "sar1", "--params", "a=0.75,tau=5", "--max-lag", "5",
                     "--bins", "5", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert float(rows[4]["rho_tilde"]) == 0.75
    assert float(rows[0]["population_rho"]) == 0.0
    assert 0 < float(rows[4]["population_rho"]) < 0.75


def test_acf_detects_ar1(ar_events, tmp_path):
    out = tmp_path / "acf.csv"
    assert cli_main(["acf", str(ar_events), "--bins", "5", "--max-lag", "5", "--alpha", "0.10",
                     "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 5
    assert float(rows[0]["rho_hat"]) > float(rows[0]["upper_bound"])


def test_acf_json_and_svg(ar_events, tmp_path):
    out, svg = tmp_path / "acf.json", tmp_path / "acf.svg"
    assert cli_main(["acf", str(ar_events), "--max-lag", "20", "--mc-draws", "2000",
                     "--out", str(out), "--svg", str(svg)]) == 0
    data = json.loads(out.read_text())
    assert data["meta"]["alpha"] == 0.05 and data["meta"]["d"] == 5
    assert svg.read_text().count('class="stem"') == 20


def test_acf_no_bounds(ar_events, capsys):
    assert cli_main(["acf", str(ar_events), "--max-lag", "2", "--no-bounds"]) == 0
    assert capsys.readouterr().out.splitlines()[1].endswith(",")


def test_acf_spatial_grid(tmp_path):
    rng = np.random.default_rng(0)
    lines = ["t,x,y"]
    for t in range(1, 41):
        scale = np.exp(rng.normal())
        for x, y in rng.random((rng.poisson(60 * scale), 2)):
            lines.append(f"{t},{float(x)!r},{float(y)!r}")
    path = tmp_path / "sp.csv"
    path.write_text("\n".join(lines) + "\n")
    out = tmp_path / "sp_acf.csv"
    assert cli_main(["acf", str(path), "--grid", "3x3", "--max-lag", "3", "--mc-draws", "2000",
                     "--out", str(out)]) == 0
    assert len(read_csv(out)) == 3


def test_deterministic_outputs(ar_events, tmp_path):
    outs = []
    for i in range(2):
        out, svg = tmp_path / f"r{i}.csv", tmp_path / f"r{i}.svg"
        assert cli_main(["acf", str(ar_events), "--max-lag", "4", "--mc-draws", "5000",
                         "--out", str(out), "--svg", str(svg)]) == 0
        outs.append((out.read_bytes(), svg.read_bytes()))
    assert outs[0] == outs[1]


def test_validation_errors_aggregated(ar_events, capsys):
    code = cli_main(["--json-errors", "acf", str(ar_events), "--bins", "0", "--alpha", "2",
                     "--mc-draws", "10", "--max-lag", "0"])
    assert code == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    data = json.loads(err)
    assert data["error"] == "ConfigError" and data["exit_code"] == 1
    assert len(data["problems"]) == 4


def test_usage_error_exit_1(capsys):
    assert cli_main(["acf"]) == 1
    assert cli_main(["frobnicate"]) == 1


def test_numerical_error_exit_2(tmp_path, capsys):
    path = tmp_path / "sparse.csv"
    path.write_text("t,s\n1,0.1\n2,0.1\n3,0.15\n")
    assert cli_main(["--json-errors", "acf", str(path), "--bins", "2", "--max-lag", "1"]) == 2
    data = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert data["error"] == "DegenerateBinError" and data["lag"] == 0


def test_floor_mode_recovers(tmp_path):
    # bin 0 is occupied only on odd days, so C_1[0, 0] = 0
    rows = ["t,s"]
    for t, (a, b) in enumerate([(9, 0), (0, 9), (8, 0), (0, 8), (10, 0), (0, 10)], start=1):
        rows += [f"{t},0.25"] * a + [f"{t},0.75"] * b
    path = tmp_path / "f.csv"
    path.write_text("\n".join(rows) + "\n")
    base = ["acf", str(path), "--bins", "2", "--max-lag", "1", "--no-bounds"]
    assert cli_main(base + ["--out", str(tmp_path / "a.csv")]) == 2
    assert cli_main(base + ["--floor", "--out", str(tmp_path / "b.csv")]) == 0
    assert cli_main(base + ["--floor", "1e-6", "--out", str(tmp_path / "c.csv")]) == 0
    assert read_csv(tmp_path / "b.csv")[0]["rho_hat"] != read_csv(tmp_path / "c.csv")[0]["rho_hat"]


def test_bad_input_file(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,s\n0,0.5\n")
    assert cli_main(["acf", str(path)]) == 1


def test_missing_coefficient():
    assert cli_main(["simulate", "--family", "ar1"]) == 1


def test_power_small(tmp_path):
    out = tmp_path / "p.csv"
    assert cli_main(["power", "--family", "ma1", "--b", "1", "--n-list", "60,80", "--replicates", "4",
                     "--max-lag", "3", "--mc-draws", "2000", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 6 and rows[0]["n"] == "60" and rows[3]["n"] == "80"


def test_power_validation():
    assert cli_main(["power", "--n-list", "5", "--max-lag", "10", "--replicates", "0"]) == 1


def test_config_collects_everything():
    with pytest.raises(ConfigError) as info:
        AnalysisConfig(region=(1.0, 0.0), bins=3, grid=(2, 2), alpha=0.0, mc_draws=1, floor=-1.0).validate()
    assert len(info.value.problems) == 6
