"""
Test experiment configs, the case runner and its artifacts
"""

import json

import numpy as np
import pandas as pd
from pydantic import ValidationError
import pytest

from whitney_dbar import runner
from whitney_dbar.exceptions import ConfigError, InvalidInputError, NumericalContractError
from whitney_dbar.plane_sets import circle_sample
from whitney_dbar.runner import EXPERIMENTS, load_config, run, shipped_config, with_set_spec
from whitney_dbar.schemas.config import ExperimentConfig, FunctionSymbol
from whitney_dbar.schemas.reports import MaxPrincipleReport, MaxPrincipleTable
from whitney_dbar.utils import sha256_hex


def _config(**fields) -> ExperimentConfig:
    return ExperimentConfig.model_validate(fields)


###############
### Configs ###
###############


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_shipped_configs_validate(name):
    config = load_config(shipped_config(name))
    assert config.experiment == name
    assert config.seed == 0


def test_unknown_shipped_config():
    with pytest.raises(ConfigError):
        shipped_config("no-such-experiment")


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


@pytest.mark.parametrize(
    "fields",
    [
        {"experiment": "holo-approx", "grid": {}, "deltas": [0.1]},
        {"experiment": "commutator-scan", "set": {"kind": "circle"}, "scales": [0.2, 0.4]},
        {"experiment": "commutator-scan", "set": {"kind": "circle"}, "scales": [0.2, -0.1]},
        {"experiment": "snowflake-jet", "set": {"kind": "circle"}, "scales": [0.2, 0.1, 0.05]},
        {"experiment": "locally-constant", "set": {"kind": "ifs", "depth": 3}, "levels": [4]},
        {"experiment": "locally-constant", "set": {"kind": "ifs", "ifs": "koch"}, "levels": [1]},
        {"experiment": "locally-constant", "set": {"kind": "circle"}, "levels": [1]},
        {"experiment": "dbar-correction", "grid": {}, "functions": ["bump"]},
        {
            "experiment": "max-principle",
            "region": {"kind": "polygon", "vertices": [[0, 0], [1, 1]]},
        },
        {"experiment": "perimeter", "region": {"kind": "disk"}, "grid": {}, "functions": ["z"] * 2},
        {"experiment": "extend-linear", "functions": ["polynomial"]},
        {"experiment": "extend-linear", "functions": ["koch-parameter"]},
        {"experiment": "commutator-scan", "set": {"kind": "file"}, "scales": [0.2]},
        {"experiment": "no-such-experiment"},
    ],
)
def test_invalid_configs(fields):
    with pytest.raises(ValidationError):
        _config(**fields)


def test_set_alias_and_defaults():
    config = _config(experiment="commutator-scan", set={"kind": "circle", "n": 32}, scales=[0.5])
    assert config.sample.n == 32
    assert config.functions == [FunctionSymbol.Z]
    assert config.method == "fft"


def test_set_path_resolved_against_config(tmp_path):
    (tmp_path / "sets").mkdir()
    (tmp_path / "sets" / "circle.json").write_text(circle_sample(16).to_json())
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "experiment": "commutator-scan",
                "set": {"kind": "file", "path": "sets/circle.json"},
                "functions": ["z^2"],
                "scales": [0.8, 0.6, 0.4],
            }
        )
    )
    config = load_config(path)
    assert config.sample.path == (tmp_path / "sets" / "circle.json").resolve()
    manifest = run(config, out_dir=tmp_path / "out")
    assert [f.path for f in manifest.files] == [
        "commutator-scan_z-2_profile.csv",
        "commutator-scan_z-2_verdict.json",
    ]


###############
### Running ###
###############


def test_manifest_hashes_match_files(tmp_path):
    config = _config(
        experiment="locally-constant",
        set={"kind": "ifs", "depth": 4},
        levels=[0, 1, 2, 3, 4],
        functions=["z", "z*conj(z)"],
    )
    manifest = run(config, out_dir=tmp_path)
    stored = json.loads((tmp_path / "manifest.json").read_text())
    assert stored["experiment"] == "locally-constant"
    assert [f["path"] for f in stored["files"]] == sorted(f["path"] for f in stored["files"])
    for entry in manifest.files:
        payload = (tmp_path / entry.path).read_bytes()
        assert entry.sha256 == sha256_hex(payload)
        assert entry.size == len(payload)

    table = pd.read_csv(tmp_path / "locally-constant_z.csv")
    assert list(table.columns) == ["level", "uniform_error", "cell_diameter"]
    assert table["uniform_error"].iloc[-1] == pytest.approx(0.0, abs=1e-15)


def test_runs_are_thread_count_independent(tmp_path):
    config = _config(
        experiment="commutator-scan",
        set={"kind": "circle", "n": 96},
        functions=["z^2", "conj(z)", "z"],
        scales=[0.4, 0.2, 0.1],
    )
    one = run(config, threads=1, out_dir=tmp_path / "one")
    four = run(config, threads=4, out_dir=tmp_path / "four")
    assert one == four
    assert (tmp_path / "one" / "manifest.json").read_bytes() == (
        tmp_path / "four" / "manifest.json"
    ).read_bytes()


def test_config_hash_ignores_output_dir(tmp_path):
    fields = {"experiment": "extend-linear", "trials": 5, "dimension": 2}
    a = run(_config(**fields, output_dir=str(tmp_path / "a")))
    b = run(_config(**fields, output_dir=str(tmp_path / "b")))
    assert a.config_sha256 == b.config_sha256
    assert (tmp_path / "a" / "extend-linear.csv").exists()


def test_extend_linear_rows(tmp_path):
    run(_config(experiment="extend-linear", trials=50, dimension=3, seed=7), out_dir=tmp_path)
    table = pd.read_csv(tmp_path / "extend-linear.csv")
    assert len(table) == 51
    accepted = table[table["accepted"]]
    assert len(accepted) == 50
    assert accepted["restriction_error"].max() <= 1e-10
    assert accepted["oracle_gap"].max() <= 1e-8
    # the conjugation map on C is always the rejected last row
    assert not table["accepted"].iloc[-1]


def test_commutator_scan_verdicts(tmp_path):
    config = _config(
        experiment="commutator-scan",
        set={"kind": "circle", "n": 256},
        functions=["z^2", "conj(z)"],
        scales=[0.4, 0.2, 0.1, 0.05],
        dump_grids=True,
    )
    run(config, out_dir=tmp_path)
    holo = json.loads((tmp_path / "commutator-scan_z-2_verdict.json").read_text())
    anti = json.loads((tmp_path / "commutator-scan_conj-z_verdict.json").read_text())
    assert holo["holomorphic_like"] and not anti["holomorphic_like"]
    assert holo["case"] == "z^2"
    kernel = np.frombuffer((tmp_path / "commutator-scan_z-2_kernel.bin").read_bytes(), dtype="<f8")
    assert kernel.size == 2 * 256**2


def test_determinacy_dumps_jet(tmp_path):
    config = _config(
        experiment="whitney-determinacy",
        set={"kind": "grid", "n": 4, "spacing": 0.25},
        functions=["z^2"],
        scales=[0.6, 0.3],
        dump_grids=True,
    )
    run(config, out_dir=tmp_path)
    document = json.loads((tmp_path / "whitney-determinacy_z-2_jet.json").read_text())
    assert len(document["values"]) == len(document["diffs"]) == 16
    assert all(anti_re == anti_im == 0.0 for *_, anti_re, anti_im in document["diffs"])

    scan = pd.read_csv(tmp_path / "whitney-determinacy_z-2_determinacy.csv")
    assert scan["spread"].max() <= 2 * 0.3 + 1e-12


def test_failed_case_writes_nothing(tmp_path, monkeypatch):
    def broken(u, region, **_):
        return MaxPrincipleReport(sup_boundary=float("inf"), sup_interior=0.0, passed=True)

    monkeypatch.setattr(runner, "max_principle_check", broken)
    config = _config(experiment="max-principle", region={"kind": "disk"}, trials=1)
    with pytest.raises(NumericalContractError):
        run(config, out_dir=tmp_path / "out")
    assert not (tmp_path / "out").exists()


def test_csv_rejects_infinity():
    table = MaxPrincipleTable(
        rows=[MaxPrincipleReport(sup_boundary=float("inf"), sup_interior=0.0, passed=True)]
    )
    with pytest.raises(NumericalContractError):
        runner.csv_bytes(table)


def test_out_of_range_result_is_input_error(tmp_path, monkeypatch):
    def negative(u, region, **_):
        return MaxPrincipleReport(sup_boundary=-1.0, sup_interior=0.0, passed=True)

    monkeypatch.setattr(runner, "max_principle_check", negative)
    config = _config(experiment="max-principle", region={"kind": "disk"}, trials=1)
    with pytest.raises(InvalidInputError):
        run(config, out_dir=tmp_path / "out")
    assert not (tmp_path / "out").exists()


################
### Set spec ###
################


def test_with_set_spec_swaps_sample(tmp_path):
    spec = tmp_path / "circle.json"
    spec.write_text(circle_sample(16).to_json())
    config = _config(
        experiment="commutator-scan",
        set={"kind": "circle", "n": 256},
        functions=["z^2"],
        scales=[0.8, 0.6, 0.4],
    )
    swapped = with_set_spec(config, spec)
    assert swapped.sample.kind == "file"
    assert swapped.sample.path == spec.resolve()
    assert swapped.scales == config.scales
    assert config.sample.kind == "circle"


def test_with_set_spec_rejects_bad_document(tmp_path):
    spec = tmp_path / "bad.json"
    spec.write_text("{ not json")
    config = _config(experiment="commutator-scan", set={"kind": "circle"}, scales=[0.2])
    with pytest.raises(InvalidInputError):
        with_set_spec(config, spec)


def test_with_set_spec_keeps_experiment_constraints(tmp_path):
    spec = tmp_path / "circle.json"
    spec.write_text(circle_sample(16).to_json())
    config = _config(
        experiment="locally-constant", set={"kind": "ifs", "depth": 3}, levels=[1]
    )
    with pytest.raises(ValidationError):
        with_set_spec(config, spec)
