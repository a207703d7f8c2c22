import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from qpflab import __version__
from qpflab.cli import emit_svg, load_config, main
from qpflab.errors import ConfigError, TooManyPoints
from qpflab.graphs import iterate_boundary, make_grid
from qpflab.systems import make_arctan_family


def run(tmp_path, *args, name="o"):
    out = str(tmp_path / name)
    return main([*args, "--out", out]), out


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_graph_outputs_and_repr_round_trip(tmp_path):
    code, out = run(tmp_path, "graph", "--alpha", "10", "--beta", "0.5", "--grid", "64", "--iterates", "300",
                    "--which", "upper,lower", "--svg")
    assert code == 0
    rows = read_csv(out + ".csv")
    assert rows[0] == ["theta", "upper", "lower"] and len(rows) == 65
    ref = iterate_boundary(make_arctan_family(10.0, 0.5), "upper", 300, grid=make_grid(64, make_arctan_family(10, .5)))
    assert np.array_equal([float(r[1]) for r in rows[1:]], ref.values)
    doc = json.load(open(out + ".json"))
    assert doc["schema"] == "qpflab.graph/1" and doc["version"] == __version__
    assert "out" not in doc["config"] and doc["config"]["beta"] == 0.5
    assert doc["graphs"]["upper"]["lyapunov"] < 0
    assert open(out + ".svg").read().startswith("<?xml")


def test_graph_is_byte_reproducible(tmp_path):
    args = ("graph", "--family", "symmetric", "--alpha", "10", "--beta", "1.0", "--grid", "128", "--iterates",
            "200", "--which", "all", "--svg")
    run(tmp_path, *args, name="a")
    run(tmp_path, *args, name="b")
    for ext in (".csv", ".json", ".svg"):
        assert (tmp_path / ("a" + ext)).read_bytes() == (tmp_path / ("b" + ext)).read_bytes()


def test_lyapunov_and_domain_failure(tmp_path):
    # near the repelling fixed line both directions stay in the domain
    code, out = run(tmp_path, "lyapunov", "--alpha", "10", "--beta", "0", "--theta", "0.3", "--x", "1e-3",
                    "--horizons", "1,10,100")
    assert code == 0
    doc = json.load(open(out + ".json"))
    assert doc["horizons"] == [1, 10, 100] and doc["forward"][-1] < 0
    # backward orbit of x=1 leaves the range of the fibre maps
    code, _ = run(tmp_path, "lyapunov", "--alpha", "10", "--beta", "0.5", "--x", "1", name="bad")
    assert code == 1


def test_bifurcate_small(tmp_path):
    code, out = run(tmp_path, "bifurcate", "--alpha", "10", "--lo", "0.9", "--hi", "1.0", "--tol", "1e-2",
                    "--grid", "64", "--iterates", "2000")
    assert code == 0
    br = json.load(open(out + ".json"))["bracket"]
    assert br["width"] <= 1e-2 and 0.96 < br["hi"] <= 1.0


def test_timesets_quiet_window(tmp_path):
    code, out = run(tmp_path, "timesets", "--alpha", "1e12", "--gamma", "1e-5", "--window", "1000")
    assert code == 0
    assert json.load(open(out + ".json"))["lemmas"]
    assert (tmp_path / "o.table.json").exists()


def test_timesets_need_alpha_and_gamma(tmp_path):
    assert run(tmp_path, "timesets", "--alpha", "100")[0] == 2


def test_sink_source(tmp_path):
    base = ("sink-source", "--family", "rescaled_arctan", "--alpha", "100", "--gamma", "0.0625")
    assert run(tmp_path, *base, "--mode", "strict", "--p-max", "1")[0] == 2
    assert run(tmp_path, *base, "--p-max", "9", "--window", "100")[0] == 2
    code, out = run(tmp_path, *base, "--p-max", "1")
    assert code == 0
    cands = json.load(open(out + ".json"))["candidates"]
    assert [c["p"] for c in cands] == [0, 1]


def test_induction_small(tmp_path):
    code, out = run(tmp_path, "induction", "--family", "rescaled_arctan", "--alpha", "1e4", "--gamma", "0.03125",
                    "--samples", "2", "--l-max", "4", "--n-max", "6")
    assert code == 0
    assert len(json.load(open(out + ".json"))["reports"]) == 2


def test_peaks_pinched(tmp_path):
    code, out = run(tmp_path, "peaks", "--family", "pinched", "--alpha", "3", "--grid", "512",
                    "--orbit-points", "4", "--iterates", "3")
    assert code == 0
    assert json.load(open(out + ".json"))["chains"][0] == 3


def test_harper_and_cocycle(tmp_path):
    assert run(tmp_path, "harper", "--E", "0", "--lam", "2", "--grid", "64", "--iterates", "200")[0] == 0
    assert run(tmp_path, "harper", "--family", "arctan", "--alpha", "3", name="h")[0] == 2
    code, out = run(tmp_path, "cocycle", "--energies", "0,4.4", "--samples", "4", "--iterates", "1000",
                    name="c")
    assert code == 0
    est = json.load(open(out + ".json"))["estimates"]
    assert est[0][1] == pytest.approx(np.log(2.0), abs=0.05)  # Herman bound log(lam/2) at lam=4


def test_usage_errors(tmp_path, capsys):
    assert main(["nosuch"]) == 2
    assert main(["graph", "--bogus", "1"]) == 2
    assert run(tmp_path, "graph", "--alpha", "-1")[0] == 2
    assert "flag.alpha" in capsys.readouterr().err
    assert run(tmp_path, "graph", "--family", "pinched", "--alpha", "3", "--beta", "1")[0] == 2
    assert "not a parameter" in capsys.readouterr().err
    assert run(tmp_path, "graph", "--config", str(tmp_path / "missing.ini"))[0] == 2


def test_config_file_sections_and_precedence(tmp_path):
    ini = tmp_path / "r.ini"
    ini.write_text("[run]\nalpha = 5\nbeta = 0.3\ngrid = 1e3\n[graph]\nwhich = lower\n")
    cfg = load_config("graph", str(ini), {"alpha": "7"})
    assert (cfg["alpha"], cfg["beta"], cfg["grid"], cfg["which"]) == (7.0, 0.3, 1000, "lower")
    ini.write_text("[run]\nalpha = 5\nbogus = 1\n")
    with pytest.raises(ConfigError, match=r"run\.bogus"):
        load_config("graph", str(ini), {})
    ini.write_text("[graph]\nwhich = sideways\n")
    with pytest.raises(ConfigError, match=r"graph\.which"):
        load_config("graph", str(ini), {})


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qpflab", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == __version__


def test_svg_empty_and_deterministic():
    empty = emit_svg([])
    assert empty.startswith("<?xml") and "<circle" not in empty
    x = np.linspace(0, 1, 50, endpoint=False)
    s = [(x, np.sin(6 * x), "black"), (x, np.full(50, np.nan), "gray")]
    a = emit_svg(s, title="a<b")
    assert a == emit_svg(s, title="a<b")
    assert a.count("<circle") == 50 and "a&lt;b" in a


def test_svg_point_limit():
    x = np.zeros(10**6 + 1)
    with pytest.raises(TooManyPoints):
        emit_svg([(x, x, "black")])
