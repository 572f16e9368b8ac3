import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qdphonons import cli
from qdphonons.catalog import fixtures_dir

DATA = fixtures_dir()
MODES_B = str(DATA / "modes_no_dbr.csv")
MODES_C = str(DATA / "modes_with_dbr.csv")
REF_D = str(DATA / "couplings_no_dbr.csv")
REF_E = str(DATA / "couplings_with_dbr.csv")


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def rows(text):
    body = "".join(line + "\n" for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


@pytest.fixture
def zero_catalog(tmp_path):
    p = tmp_path / "modes_zero.csv"
    p.write_text("family,index,freq_mhz,m_eff_pg,u_zpf_fm,g_max_khz\nF,1,0.0091,182.6,,0\nL,1,0.6954,97.1,,0\n")
    return str(p)


# --- couplings --------------------------------------------------------------

def test_couplings_f1(capsys):
    rc, out, _ = run(capsys, "couplings", "--modes", MODES_B, "--temperature", "4", "--no-timestamp")
    assert rc == 0
    table = rows(out)
    assert len(table) == 61
    f1 = table[0]
    assert (f1["family"], f1["index"]) == ("F", "1")
    assert float(f1["theta_sq"]) == pytest.approx(5.11e8, rel=0.03)
    assert float(f1["freq_mhz"]) == pytest.approx(0.0091, rel=1e-12)


def test_couplings_zero_temperature(capsys):
    rc, out, _ = run(capsys, "couplings", "--modes", MODES_B, "--temperature", "0", "--no-timestamp")
    assert rc == 0
    assert all(float(r["theta_sq"]) == 0.0 for r in rows(out))


def test_missing_file_names_path(capsys, tmp_path):
    missing = tmp_path / "nowhere" / "modes.csv"
    rc, _, err = run(capsys, "couplings", "--modes", str(missing))
    assert rc == 2
    assert str(missing) in err


def test_malformed_catalog_is_input_error(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("family,index,freq_mhz,m_eff_pg,u_zpf_fm,g_max_khz\nF,1,abc,1,,1\n")
    rc, _, err = run(capsys, "couplings", "--modes", str(p))
    assert rc == 2
    assert "line 2" in err and "freq_mhz" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["couplings", "--format", "xml"])
    assert info.value.code == 2


# --- validate ---------------------------------------------------------------

def test_validate_with_dbr_passes(capsys):
    rc, out, err = run(capsys, "validate", "--modes", MODES_C, "--reference", REF_E, "--no-timestamp")
    assert rc == 0
    assert err.strip().endswith("PASS")
    assert "F: max |dev|" in err and "L: max |dev|" in err


def test_validate_no_dbr_flags_inconsistent_rows(capsys):
    # the printed eta^2 of F36-F39 does not follow from the printed frequencies,
    # couplings and theta^2 (see the ledger); every other row is within 3%
    rc, out, err = run(capsys, "validate", "--modes", MODES_B, "--reference", REF_D, "--no-timestamp")
    assert rc == 1
    failed = [(r["family"], r["index"]) for r in rows(out) if r["status"] == "FAIL"]
    assert failed == [("F", "36"), ("F", "37"), ("F", "38"), ("F", "39")]


def test_validate_corrupted_row(capsys, tmp_path):
    text = (DATA / "couplings_with_dbr.csv").read_text()
    lines = text.splitlines()
    i = next(k for k, line in enumerate(lines) if line.startswith("L,7,"))
    fam, idx, theta, eta = lines[i].split(",")
    lines[i] = f"{fam},{idx},{float(theta) * 1.5:.3e},{eta}"
    p = tmp_path / "corrupt.csv"
    p.write_text("\n".join(lines) + "\n")
    rc, _, err = run(capsys, "validate", "--modes", MODES_C, "--reference", str(p), "--no-timestamp")
    assert rc == 1
    assert "FAIL L,7" in err


def test_validate_orphans(capsys, tmp_path):
    lines = [line for line in (DATA / "couplings_with_dbr.csv").read_text().splitlines()
             if not line.startswith("F,39,")]
    lines.append("T,1,0,0")
    p = tmp_path / "orphans.csv"
    p.write_text("\n".join(lines) + "\n")
    rc, _, err = run(capsys, "validate", "--modes", MODES_C, "--reference", str(p))
    assert rc == 2
    assert "only in catalog: F39" in err
    assert "only in reference: T1" in err


# --- indist -----------------------------------------------------------------

@pytest.mark.parametrize("preset, expected, tol", [("table1-c", 0.9999, 5e-4), ("table1-b", 0.034, 0.01)])
def test_indist_presets(capsys, preset, expected, tol):
    rc, out, err = run(capsys, "indist", "--preset", preset, "--no-timestamp")
    assert rc == 0
    (r,) = rows(out)
    assert float(r["indistinguishability"]) == pytest.approx(expected, abs=tol)
    assert "quadrature error estimate" in err


def test_indist_zero_coupling(capsys, zero_catalog):
    rc, out, _ = run(capsys, "indist", "--modes", zero_catalog, "--position", "sidewall", "--purcell", "1",
                     "--no-timestamp")
    assert rc == 0
    assert float(rows(out)[0]["indistinguishability"]) == 1.0


def test_indist_overrides(capsys):
    rc, out, _ = run(capsys, "indist", "--preset", "table1-c", "--gamma-bulk-ghz", "2", "--gamma-b-rel", "0.1",
                     "--efficiency", "0.5", "--no-timestamp")
    assert rc == 0
    r = rows(out)[0]
    assert float(r["gamma_bulk_per_s"]) == 2e9
    assert float(r["gamma_b_per_s"]) == pytest.approx(2e8)
    assert float(r["efficiency"]) == 0.5


def test_indist_needs_scenario(capsys):
    rc, _, err = run(capsys, "indist", "--modes", MODES_B)
    assert rc == 2 and "position" in err
    rc, _, err = run(capsys, "indist", "--preset", "table1-z")
    assert rc == 2 and "unknown preset" in err


def test_invalid_override_is_input_error(capsys):
    rc, _, _ = run(capsys, "indist", "--preset", "table1-c", "--efficiency", "1.7")
    assert rc == 2
    rc, _, _ = run(capsys, "indist", "--preset", "table1-c", "--rel-tol", "0")
    assert rc == 2


def test_quadrature_failure_exit_code(capsys, monkeypatch):
    from qdphonons.quadrature import QuadratureError

    def boom(*a, **k):
        raise QuadratureError("no convergence", 0.5, 1e-3)

    monkeypatch.setattr(cli, "merit_report", boom)
    rc, _, err = run(capsys, "indist", "--preset", "table1-c")
    assert rc == 1 and "computation failed" in err


# --- sweep ------------------------------------------------------------------

def test_sweep_with_dbr_axis(capsys):
    rc, out, _ = run(capsys, "sweep", "--preset", "table1-c", "--range", "0.5:20:40", "--no-timestamp")
    assert rc == 0
    series = [(float(r["temperature_k"]), float(r["indistinguishability"])) for r in rows(out)]
    assert len(series) == 40
    assert [T for T, _ in series] == sorted(T for T, _ in series)
    assert min(I for _, I in series) > 0.99


def test_sweep_single_point_matches_indist(capsys):
    _, out, _ = run(capsys, "sweep", "--preset", "table1-b", "--range", "4:4:1", "--no-timestamp")
    (point,) = rows(out)
    _, out, _ = run(capsys, "indist", "--preset", "table1-b", "--no-timestamp")
    assert point["indistinguishability"] == rows(out)[0]["indistinguishability"]


def test_sweep_default_range_from_presets(capsys):
    rc, out, _ = run(capsys, "sweep", "--preset", "table1-c", "--no-timestamp")
    assert rc == 0
    table = rows(out)
    assert len(table) == 40
    assert float(table[0]["temperature_k"]) == 0.5 and float(table[-1]["temperature_k"]) == 20.0


@pytest.mark.parametrize("spec", ["20:0.5:40", "1:2", "a:b:c", "1:2:0", "1:inf:3"])
def test_sweep_bad_range(capsys, spec):
    rc, _, err = run(capsys, "sweep", "--preset", "table1-c", "--range", spec)
    assert rc == 2
    assert "range" in err


# --- spectrum ---------------------------------------------------------------

def test_spectrum_free_emitter(capsys, zero_catalog):
    rc, out, _ = run(capsys, "spectrum", "--modes", zero_catalog, "--position", "axis", "--purcell", "1",
                     "--gamma-bulk-ghz", "1", "--range", "-500:500:11", "--no-timestamp")
    assert rc == 0
    table = rows(out)
    gamma = 1e9
    for r in table:
        w = 2 * math.pi * 1e6 * float(r["detuning_mhz"])
        lorentz = (gamma / 2) / (w**2 + gamma**2 / 4)
        assert float(r["s_value_s"]) == pytest.approx(lorentz, abs=1e-8 * 2 / gamma)
    assert float(table[5]["s_value_s"]) == pytest.approx(2 / gamma, rel=1e-8)


def test_spectrum_requires_grid(capsys):
    rc, _, err = run(capsys, "spectrum", "--preset", "table1-b")
    assert rc == 2 and "range" in err


# --- table1 -----------------------------------------------------------------

def test_table1(capsys):
    rc, out, _ = run(capsys, "table1", "--no-timestamp")
    assert rc == 0
    t = {r["config"]: r for r in rows(out)}
    assert sorted(t) == ["table1-a", "table1-b", "table1-c", "table1-d"]
    assert float(t["table1-c"]["product"]) == pytest.approx(0.978, abs=1e-3)
    assert float(t["table1-a"]["indistinguishability"]) == pytest.approx(0.821, abs=0.02)
    assert float(t["table1-d"]["indistinguishability"]) == pytest.approx(0.748, abs=0.02)


def test_fixture_dir_override(capsys, tmp_path, monkeypatch):
    for name in ("modes_with_dbr.csv", "presets.json"):
        (tmp_path / name).write_bytes((DATA / name).read_bytes())
    presets = json.loads((tmp_path / "presets.json").read_text())
    presets["configurations"] = {"only": presets["configurations"]["table1-c"]}
    (tmp_path / "presets.json").write_text(json.dumps(presets))
    monkeypatch.setenv("PHONON_FIXTURES_DIR", str(tmp_path))
    rc, out, _ = run(capsys, "table1", "--no-timestamp")
    assert rc == 0
    assert [r["config"] for r in rows(out)] == ["only"]


# --- output contract --------------------------------------------------------

COMMANDS = [
    ["couplings", "--modes", MODES_B],
    ["validate", "--modes", MODES_C, "--reference", REF_E],
    ["indist", "--preset", "table1-d"],
    ["sweep", "--preset", "table1-b", "--range", "1:8:3"],
    ["spectrum", "--preset", "table1-b", "--range", "-800:800:5"],
    ["table1"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: a[0])
def test_byte_identical_reruns(capsys, tmp_path, argv):
    outputs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        rc = cli.main(argv + ["--no-timestamp", "--out", str(path)])
        capsys.readouterr()
        assert rc == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["run0.csv", "run1.csv"]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: a[0])
def test_csv_and_json_agree(capsys, argv):
    _, out_csv, _ = run(capsys, *argv, "--no-timestamp")
    _, out_json, _ = run(capsys, *argv, "--no-timestamp", "--format", "json")
    doc = json.loads(out_json)
    table = rows(out_csv)
    assert len(table) == len(doc["rows"])
    for r_csv, r_json in zip(table, doc["rows"]):
        for col, text in r_csv.items():
            v = r_json[col]
            if isinstance(v, float):
                assert v == float(text)
                assert f"{v:.11e}" == text
            else:
                assert str(v) == text


def test_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "indist", "--preset", "table1-a", "--no-timestamp")
    value = rows(out)[0]["indistinguishability"]
    mantissa = value.split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) == 12


def test_timestamp_flag(capsys):
    _, stamped, _ = run(capsys, "indist", "--preset", "table1-c")
    _, plain, _ = run(capsys, "indist", "--preset", "table1-c", "--no-timestamp")
    assert stamped.startswith("# generated: ")
    assert "generated" not in plain
    assert stamped.split("\n", 1)[1] == plain
    _, js, _ = run(capsys, "indist", "--preset", "table1-c", "--format", "json")
    assert "generated" in json.loads(js)


def test_out_directory_must_exist(capsys, tmp_path):
    rc, _, err = run(capsys, "indist", "--preset", "table1-c", "--out", str(tmp_path / "no" / "x.csv"))
    assert rc == 2 and "directory" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qdphonons.cli", "couplings", "--modes", "/nonexistent/modes.csv"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "/nonexistent/modes.csv" in proc.stderr
