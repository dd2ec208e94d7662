import json

import pytest

from rigidlab import cli
from rigidlab.config import KINDS, validate_config
from rigidlab.errors import ConfigError
from rigidlab.experiments import artifacts

MINIMAL_LADDER = '[experiment]\nkind = "Ladder"\n'


def _cfg(kind, section, body, **exp):
    head = "\n".join(f"{k} = {json.dumps(v)}" for k, v in exp.items())
    return f'[experiment]\nkind = "{kind}"\n{head}\n\n[{section}]\n{body}\n'


def test_minimal_ladder_parses():
    cfg = validate_config(MINIMAL_LADDER)
    assert cfg.kind == "Ladder" and cfg.experiment.replicas == 1 and cfg.params.J == 64


def test_negative_replicas_names_field():
    with pytest.raises(ConfigError) as info:
        validate_config('[experiment]\nkind = "Ladder"\nreplicas = -1\n')
    (msg,) = info.value.errors
    assert "replicas" in msg and msg.startswith("line 3")


def test_unknown_key_suggests_alpha():
    text = _cfg("VarianceSweep", "variance_sweep", 'process = "gaf"\nalhpa = 0.5')
    with pytest.raises(ConfigError) as info:
        validate_config(text)
    assert any("alhpa" in e and "'alpha'" in e for e in info.value.errors)


def test_type_and_section_errors_are_collected():
    text = '[experiment]\nkind = "Ladder"\nemit = ["csv", "pdf"]\n[ladder]\nJ = "many"\n[extra]\nx = 1\n'
    with pytest.raises(ConfigError) as info:
        validate_config(text)
    errs = info.value.errors
    assert len(errs) == 3
    assert any("emit" in e for e in errs) and any("J" in e and "integer" in e for e in errs)
    assert any("[extra]" in e for e in errs)


def test_bad_kind_and_syntax():
    with pytest.raises(ConfigError, match="SampleGaf"):
        validate_config('[experiment]\nkind = "SampleGAF"\n')
    with pytest.raises(ConfigError, match="syntax"):
        validate_config("[experiment\n")


def test_every_kind_has_a_bundled_config():
    names = cli.demo_names()
    kinds = {validate_config((cli.demo_dir() / f"{n}.toml").read_text()).kind for n in names}
    assert kinds == set(KINDS)


def test_kakutani_rows():
    text = _cfg("KakutaniSweep", "kakutani_sweep", "beta = 1.0\nK_max = 10000")
    lines = artifacts(validate_config(text))["kakutani_sweep.csv"].split("\r\n")
    assert lines[0].startswith("# config_sha256=") and lines[1] == "K,partial_product"
    rows = {int(k): float(v) for k, v in (ln.split(",") for ln in lines[2:] if ln)}
    last = rows[10000]
    assert last > 0 and abs(last - rows[1000]) < 1e-3


def test_classify_bergman_verdict():
    text = _cfg("Classify", "classify", 'measure = "bergman"\nJ = 128')
    d = json.loads(artifacts(validate_config(text))["classify.json"])
    assert d["verdict"] == "NotRigidNumbers" and "config_sha256" in d


def test_sample_gaf_three_svgs(tmp_path):
    text = _cfg("SampleGaf", "sample_gaf", "alphas = [0.4, 0.5, 1.0]\nR = 3.0",
                replicas=1, master_seed=1, emit=["svg", "json"])
    files = artifacts(validate_config(text))
    svgs = sorted(n for n in files if n.endswith(".svg"))
    assert len(svgs) == 3 and not any(n.endswith(".csv") for n in files)
    counts = [s["counts"][0] for s in json.loads(files["sample_gaf.json"])["samples"]]
    assert len(set(counts)) == 3


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "ok.toml"
    good.write_text(_cfg("AppendixDemos", "appendix", "half_window = 2", output_dir=str(tmp_path / "out")))
    assert cli.main(["validate", str(good)]) == 0
    assert cli.main(["run", str(good)]) == 0
    assert (tmp_path / "out" / "appendix.json").exists()
    bad = tmp_path / "bad.toml"
    bad.write_text('[experiment]\nkind = "Ladder"\nreplicas = 0\n')
    assert cli.main(["run", str(bad)]) == 2
    rec = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert rec["error"] == "ConfigError"
    fail = tmp_path / "fail.toml"
    fail.write_text(_cfg("SampleGaf", "sample_gaf", "R = 9.0"))
    assert cli.main(["run", str(fail), "-o", str(tmp_path / "f")]) == 1
    rec = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert rec["error"] == "BadParams" and rec["context"]["replica"] == 0 and "seed" in rec["context"]


def test_outputs_independent_of_threads(monkeypatch):
    text = _cfg("SampleDpp", "sample_dpp", "n = 16", replicas=6, master_seed=99)
    cfg = validate_config(text)
    monkeypatch.setenv("RIGIDLAB_THREADS", "1")
    one = artifacts(cfg)
    monkeypatch.setenv("RIGIDLAB_THREADS", "4")
    assert artifacts(cfg) == one
