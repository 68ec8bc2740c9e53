import filecmp
import json
import os
import shutil
from pathlib import Path

import pytest

from felkeldysh import cli
from felkeldysh.config import Config, derive_seed, parse_text
from felkeldysh.errors import ConfigurationError
from felkeldysh.output import read_csv_rows

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL_LANGEVIN = """\
seed = 11
beam.eta = 1.0
beam.n_electrons = 1.0
langevin.alpha = -1.0
langevin.beta = 0.5
langevin.d_las = 0.2
langevin.dt = 0.01
langevin.n_steps = 4000
langevin.n_traj = 12
langevin.thin = 4
langevin.write_trajectories = 3
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def tree(root):
    return sorted(str(p.relative_to(root)) for p in Path(root).rglob("*") if p.is_file())


def assert_identical(a, b):
    files = tree(a)
    assert files == tree(b)
    _, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
    assert not mismatch and not errors


def test_missing_required_key(tmp_path, capsys):
    cfg = write(tmp_path, "beam.n_electrons = 10\nbeam.m0 = 5\nbeam.sigma_m = 1\n")
    assert cli.main(["selfenergy", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "beam.eta" in capsys.readouterr().err


def test_unknown_key(tmp_path, capsys):
    cfg = write(tmp_path, "beam.eta = 1\nbeam.n_electrons = 1\nbeam.colour = red\n")
    assert cli.main(["pierce", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "beam.colour" in capsys.readouterr().err


def test_bad_value_names_key(tmp_path, capsys):
    cfg = write(tmp_path, "beam.eta = fast\nbeam.n_electrons = 1\n")
    assert cli.main(["pierce", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "beam.eta" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert cli.main(["pierce", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 2


def test_bracket_without_sign_change(tmp_path, capsys):
    text = (CONFIGS / "gaussian_beam.cfg").read_text()
    text = text.replace("dispersion.bracket_lo = 40.0", "dispersion.bracket_lo = 10.0")
    text = text.replace("dispersion.bracket_hi = 60.0", "dispersion.bracket_hi = 20.0")
    assert cli.main(["dispersion", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 3
    assert "numerical error" in capsys.readouterr().err


def test_divergence_exit_code(tmp_path):
    text = SMALL_LANGEVIN.replace("langevin.beta = 0.5", "langevin.beta = 0.0").replace(
        "langevin.alpha = -1.0", "langevin.alpha = 5.0"
    ).replace("langevin.dt = 0.01", "langevin.dt = 0.01\nlangevin.initial_re = 1e300")
    assert cli.main(["langevin", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 3


@pytest.mark.parametrize(
    "command,config,files",
    [
        ("selfenergy", "gaussian_beam.cfg", ["selfenergy.csv"]),
        ("dispersion", "gaussian_beam.cfg", ["dispersion.csv", "threshold.json"]),
        ("pierce", "gaussian_beam.cfg", ["pierce.json"]),
        ("lgk", "gaussian_beam.cfg", ["lgk.json"]),
        ("meanfield", "meanfield_cold.cfg", ["meanfield.csv"]),
    ],
)
def test_subcommands_write_headed_files(tmp_path, command, config, files):
    out = tmp_path / "o"
    assert cli.main([command, "--config", str(CONFIGS / config), "--out", str(out)]) == 0
    assert tree(out) == sorted(files)
    for name in files:
        text = (out / name).read_text()
        if name.endswith(".csv"):
            assert text.startswith("# config_hash=")
        else:
            header = json.loads(text)["_header"]
            assert set(header) == {"config_hash", "seed"}


def test_selfenergy_rows_have_both_methods(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["selfenergy", "--config", str(CONFIGS / "gaussian_beam.cfg"), "--out", str(out)]) == 0
    lines = (out / "selfenergy.csv").read_text().splitlines()
    assert "seed=7" in lines[0]
    assert lines[1].split(",")[-1] == "method"
    assert {r[-1] for r in read_csv_rows(out / "selfenergy.csv")} == {"discrete", "gaussian"}


def test_broadening_warning_does_not_fail(tmp_path, capsys):
    assert cli.main(["selfenergy", "--config", str(CONFIGS / "gaussian_beam.cfg"), "--out", str(tmp_path)]) == 0
    assert "warning" in capsys.readouterr().err


def test_threshold_report_contents(tmp_path):
    assert cli.main(["dispersion", "--config", str(CONFIGS / "gaussian_beam.cfg"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "threshold.json").read_text())
    assert 40 < report["omega_res"] < 60
    assert report["growing"] is True
    assert report["residual"] <= 1e-10 * 1000


def test_lgk_reports_non_saturating_mapping(tmp_path):
    assert cli.main(["lgk", "--config", str(CONFIGS / "gaussian_beam.cfg"), "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "lgk.json").read_text())
    assert payload["canonical"] is None and "saturate" in payload["canonical_reason"]
    text = (CONFIGS / "gaussian_beam.cfg").read_text() + "lgk.lambda_re = 0.0\nlgk.lambda_im = -1.0\n"
    out = tmp_path / "b"
    assert cli.main(["lgk", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    assert json.loads((out / "lgk.json").read_text())["canonical"]["beta"] > 0


def test_langevin_outputs(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["langevin", "--config", write(tmp_path, SMALL_LANGEVIN), "--out", str(out)]) == 0
    assert (out / "trajectories.csv").read_text().splitlines()[1] == "traj,t,re_a,im_a"
    assert len(read_csv_rows(out / "trajectories.csv")) == 3 * 1001
    stats = json.loads((out / "stats.json").read_text())
    assert stats["stream_seed"] == derive_seed(11, "langevin")
    assert stats["stats"]["mean_mod2"] > 0


def test_reruns_are_byte_identical(tmp_path):
    cfg = write(tmp_path, SMALL_LANGEVIN)
    for command in ("langevin", "selfenergy", "dispersion", "lgk", "pierce"):
        path = cfg if command == "langevin" else str(CONFIGS / "gaussian_beam.cfg")
        a, b = tmp_path / f"{command}_a", tmp_path / f"{command}_b"
        assert cli.main([command, "--config", path, "--out", str(a)]) == 0
        assert cli.main([command, "--config", path, "--out", str(b)]) == 0
        assert_identical(a, b)


def test_worker_count_does_not_change_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["langevin", "--config", write(tmp_path, SMALL_LANGEVIN), "--out", str(a)]) == 0
    text = SMALL_LANGEVIN + "langevin.workers = 4\n"
    assert cli.main(["langevin", "--config", write(tmp_path, text, "w.cfg"), "--out", str(b)]) == 0
    assert (a / "trajectories.csv").read_text().splitlines()[1:] == (b / "trajectories.csv").read_text().splitlines()[1:]
    sa = json.loads((a / "stats.json").read_text())["stats"]
    sb = json.loads((b / "stats.json").read_text())["stats"]
    assert sa == sb


def test_seed_override(tmp_path):
    cfg = write(tmp_path, SMALL_LANGEVIN)
    a, b, c = (tmp_path / n for n in "abc")
    assert cli.main(["langevin", "--config", cfg, "--out", str(a)]) == 0
    assert cli.main(["langevin", "--config", cfg, "--out", str(b), "--seed", "12"]) == 0
    assert cli.main(["langevin", "--config", cfg, "--out", str(c), "--seed", "11"]) == 0
    assert (a / "trajectories.csv").read_text() != (b / "trajectories.csv").read_text()
    assert "seed=12" in (b / "trajectories.csv").read_text().splitlines()[0]
    assert_identical(a, c)
    assert cli.main(["langevin", "--config", cfg, "--out", str(c), "--seed", "-1"]) == 2


def test_sweep_manifest_and_resume(tmp_path):
    out = tmp_path / "s"
    cfg = str(CONFIGS / "sweep_detuning.cfg")
    assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "dispersion"
    points = manifest["points"]
    assert len(points) == 6
    assert {(p["coords"]["beam.omega_eta"], p["coords"]["beam.sigma_m"]) for p in points} == {
        (w, s) for w in (48.0, 49.0, 50.0) for s in (4.0, 6.0)
    }
    for p in points:
        assert p["status"] == "ok"
        assert sorted(p["files"]) == ["dispersion.csv", "threshold.json"]
        for name in p["files"]:
            assert (out / p["dir"] / name).is_file()
    before = {p: os.stat(out / p).st_mtime_ns for p in tree(out) if p.startswith("point_")}

    # a fresh rerun matches byte for byte; a resumed run leaves finished points alone
    fresh = tmp_path / "fresh"
    assert cli.main(["sweep", "--config", cfg, "--out", str(fresh)]) == 0
    assert_identical(out, fresh)
    shutil.rmtree(out / "point_0003")
    assert cli.main(["sweep", "--config", cfg, "--out", str(out), "--resume"]) == 0
    after = {p: os.stat(out / p).st_mtime_ns for p in tree(out) if p.startswith("point_")}
    assert all(after[p] == before[p] for p in before if not p.startswith("point_0003"))
    assert_identical(out, fresh)


def test_sweep_workers_match_serial(tmp_path):
    cfg = (CONFIGS / "sweep_detuning.cfg").read_text()
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep", "--config", write(tmp_path, cfg), "--out", str(a)]) == 0
    text = cfg + "sweep.workers = 3\n"
    assert cli.main(["sweep", "--config", write(tmp_path, text, "w.cfg"), "--out", str(b)]) == 0
    files = [f for f in tree(a) if f.startswith("point_")]
    _, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
    assert not mismatch and not errors


def test_sweep_reports_failed_points(tmp_path):
    text = (CONFIGS / "sweep_detuning.cfg").read_text().replace("48.0, 49.0, 50.0", "49.0, 500.0")
    out = tmp_path / "s"
    assert cli.main(["sweep", "--config", write(tmp_path, text), "--out", str(out)]) == 3
    points = json.loads((out / "manifest.json").read_text())["points"]
    assert sorted(p["status"] for p in points) == ["failed", "failed", "ok", "ok"]


def test_sweep_needs_values(tmp_path):
    cfg = write(tmp_path, "beam.eta = 1\nbeam.n_electrons = 1\nsweep.command = pierce\n")
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_parse_text_rules():
    values = parse_text("# comment\nseed = 0x10\nbeam.eta = 2  # trailing\nsweep.beam.m0 = 3, 4\n")
    assert values["seed"] == 16 and values["beam.eta"] == 2.0
    assert values["sweep.values"] == {"beam.m0": [3, 4]}
    with pytest.raises(ConfigurationError):
        parse_text("beam.eta 2\n")
    with pytest.raises(ConfigurationError) as err:
        parse_text("sweep.seed = 1, 2\n")
    assert err.value.key == "sweep.seed"


def test_config_digest_ignores_layout():
    a = Config(parse_text("beam.eta = 1.0\nbeam.n_electrons = 5\n"))
    b = Config(parse_text("# other\nbeam.n_electrons = 5.0\n\nbeam.eta = 1\n"))
    assert a.digest() == b.digest()
    assert a.digest() != Config(parse_text("beam.eta = 1.5\nbeam.n_electrons = 5\n")).digest()
    assert derive_seed(1, "langevin") != derive_seed(1, "other")
    assert derive_seed(1, "langevin") == derive_seed(1, "langevin")
