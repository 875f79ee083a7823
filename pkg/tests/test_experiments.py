"""Tests for data generation, CSV ingestion, and the experiment protocols."""

import json
import statistics

import numpy as np
import pytest

from regcoreset.errors import DegenerateSignalError, ParseError, SchemaError
from regcoreset.experiments import (
    DataTable,
    ExperimentConfig,
    build_experiment_instance,
    emit_report,
    generate_ng_matrix,
    generate_response,
    load_csv,
    parse_report,
    run_relative_error_experiment,
    run_sparsity_experiment,
)
from regcoreset.sensitivity import ridge_leverage_scores


def _small_config(**overrides) -> ExperimentConfig:
    base = dict(
        n=60,
        d=4,
        lambda_grid=(0.5,),
        sample_sizes=(10, 20),
        schemes=("uniform", "identity"),
        objective_family="ridge",
        trials_per_cell=3,
        master_seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        _small_config(lambda_grid=())
    with pytest.raises(ValueError):
        _small_config(lambda_grid=(-0.5,))
    with pytest.raises(ValueError):
        _small_config(sample_sizes=())
    with pytest.raises(ValueError):
        _small_config(trials_per_cell=4)
    with pytest.raises(ValueError):
        _small_config(objective_family="huber")
    with pytest.raises(ValueError):
        _small_config(schemes=("made_up",))
    with pytest.raises(ValueError):
        _small_config(d=5)
    with pytest.raises(ValueError):
        _small_config(n=2)


def test_config_dict_roundtrip_and_digest():
    config = _small_config()
    clone = ExperimentConfig.from_dict(config.to_dict())
    assert clone == config
    assert clone.digest() == config.digest()
    assert _small_config(master_seed=8).digest() != config.digest()
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"n": 10, "d": 4, "lambda_grid": [1], "sample_sizes": [5], "bogus": 1})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"n": 10, "d": 4})


def test_ng_matrix_block_structure():
    A = generate_ng_matrix(100, 6, 0.00065, seed=3)
    assert A.shape == (100, 6)
    assert np.array_equal(A[-3:, 3:], np.eye(3))
    assert np.array_equal(A[-3:, :3], np.zeros((3, 3)))
    assert np.all(A[:-3, 3:] >= 0) and np.all(A[:-3, 3:] <= 1e-8)
    assert np.max(np.abs(A[:-3, :3])) < 0.00065 * 6  # six sigmas of slack
    assert np.array_equal(A, generate_ng_matrix(100, 6, 0.00065, seed=3))
    assert not np.array_equal(A, generate_ng_matrix(100, 6, 0.00065, seed=4))


def test_ng_matrix_identity_rows_carry_all_leverage():
    A = generate_ng_matrix(300, 6, 0.00065, seed=1)
    scores = ridge_leverage_scores(A, 0.0)
    assert np.all(scores.values[-3:] > 0.999)


def test_ng_matrix_validation():
    with pytest.raises(ValueError):
        generate_ng_matrix(100, 5, 0.1, 0)
    with pytest.raises(ValueError):
        generate_ng_matrix(2, 6, 0.1, 0)
    with pytest.raises(ValueError):
        generate_ng_matrix(100, 6, 0.0, 0)


def test_response_noise_level_is_exact():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((50, 3))
    x = rng.standard_normal(3)
    clean = generate_response(A, x, 0.0, seed=5)
    assert np.array_equal(clean, A @ x)
    noisy = generate_response(A, x, 1e-5, seed=5)
    level = np.linalg.norm(noisy - A @ x) / np.linalg.norm(A @ x)
    assert level == pytest.approx(1e-5, abs=1e-12)
    assert np.array_equal(noisy, generate_response(A, x, 1e-5, seed=5))
    assert not np.array_equal(noisy, generate_response(A, x, 1e-5, seed=6))


def test_response_validation():
    A = np.eye(3)
    with pytest.raises(ValueError):
        generate_response(A, np.ones(3), -1e-5, seed=0)
    with pytest.raises(DegenerateSignalError):
        generate_response(A, np.zeros(3), 1e-5, seed=0)


def test_load_csv_normalization(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("f,y\n2,1\n4,3\n")
    inst = load_csv(path, "y", normalize=True)
    assert np.array_equal(inst.design, np.array([[0.5], [1.0]]))
    assert np.array_equal(inst.response, np.array([1.0, 3.0]))
    raw = load_csv(path, "y", normalize=False)
    assert np.array_equal(raw.design, np.array([[2.0], [4.0]]))


def test_load_csv_power_plant_shape(tmp_path):
    path = tmp_path / "ccpp.csv"
    rows = ["T,V,AP,RH,EP"]
    rng = np.random.default_rng(0)
    for _ in range(12):
        rows.append(",".join(f"{v:.3f}" for v in rng.uniform(1, 100, 5)))
    path.write_text("\n".join(rows) + "\n")
    inst = load_csv(path, "EP")
    assert inst.d == 4 and inst.n == 12
    assert np.allclose(np.max(np.abs(inst.design), axis=0), 1.0, atol=1e-12)


def test_load_csv_errors(tmp_path):
    bad_cell = tmp_path / "bad.csv"
    bad_cell.write_text("f,y\nabc,1\n")
    with pytest.raises(ParseError, match="row 2.*'f'"):
        load_csv(bad_cell, "y")
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("f,y\n1\n")
    with pytest.raises(ParseError, match="row 2"):
        load_csv(ragged, "y")
    missing = tmp_path / "missing.csv"
    missing.write_text("f,y\n1,2\n")
    with pytest.raises(SchemaError):
        load_csv(missing, "z")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        load_csv(empty, "y")
    headeronly = tmp_path / "header.csv"
    headeronly.write_text("f,y\n")
    with pytest.raises(SchemaError):
        load_csv(headeronly, "y")


def test_load_csv_keeps_zero_columns(tmp_path):
    path = tmp_path / "z.csv"
    path.write_text("a,b,y\n0,2,1\n0,4,2\n")
    inst = load_csv(path, "y")
    assert np.array_equal(inst.design[:, 0], np.zeros(2))
    assert np.array_equal(inst.design[:, 1], np.array([0.5, 1.0]))


def test_build_instance_deterministic():
    config = _small_config()
    a1, x1 = build_experiment_instance(config)
    a2, x2 = build_experiment_instance(config)
    assert np.array_equal(a1.design, a2.design)
    assert np.array_equal(a1.response, a2.response)
    assert np.array_equal(x1, x2)


def test_relative_error_table_structure():
    table = run_relative_error_experiment(_small_config())
    assert table.col_labels == ["uniform", "identity"]
    assert table.row_labels == ["10", "20"]
    identity_col = [row[1] for row in table.cells]
    assert all(c < 1e-10 for c in identity_col)
    for row_cells, row_trials in zip(table.cells, table.trials):
        for cell, trial_list in zip(row_cells, row_trials):
            assert cell >= 0
            assert cell == statistics.median(trial_list)
            assert len(trial_list) == 3


def test_relative_error_runs_are_identical_across_threads():
    config = _small_config(schemes=("uniform", "ridge_leverage"))
    serial = emit_report(run_relative_error_experiment(config, threads=1), "json")
    pooled = emit_report(run_relative_error_experiment(config, threads=4), "json")
    assert serial == pooled


def test_relative_error_rlad_scheme_runs():
    config = _small_config(
        objective_family="rlad",
        schemes=("rlad_sensitivity", "uniform"),
        sample_sizes=(15,),
    )
    table = run_relative_error_experiment(config)
    assert table.col_labels == ["rlad_sensitivity", "uniform"]
    assert all(all(c >= 0 for c in row) for row in table.cells)


def test_row_labels_cover_both_grids():
    config = _small_config(lambda_grid=(0.1, 1.0), sample_sizes=(10, 20))
    table = run_relative_error_experiment(config)
    assert table.row_labels == ["10|0.1", "10|1", "20|0.1", "20|1"]
    lam_only = run_relative_error_experiment(
        _small_config(lambda_grid=(0.1, 1.0), sample_sizes=(10,))
    )
    assert lam_only.row_labels == ["0.1", "1"]


def test_sparsity_experiment_shape_and_lambda_zero_agreement():
    config = _small_config(lambda_grid=(0.0, 0.5), objective_family="ridge")
    table = run_sparsity_experiment(config)
    assert table.row_labels == ["lasso", "modified_lasso", "ridge"]
    assert table.col_labels == ["0", "0.5"]
    at_zero = [row[0] for row in table.cells]
    assert at_zero[0] == at_zero[1] == at_zero[2]
    assert all(c == 0 for c in table.cells[2])
    assert table.cells[0][1] > 0 and table.cells[1][1] > 0


def test_emit_csv_frozen_format():
    table = DataTable(
        row_labels=["row"], col_labels=["col"], cells=[[0.5]], trials=[[[0.5]]]
    )
    assert emit_report(table, "csv") == "label,col\nrow,0.500000"


def test_emit_json_roundtrip():
    table = run_relative_error_experiment(_small_config())
    doc = emit_report(table, "json")
    clone = parse_report(doc)
    assert clone.row_labels == table.row_labels
    assert clone.col_labels == table.col_labels
    assert clone.cells == [[float(c) for c in row] for row in table.cells]
    assert clone.config_digest == table.config_digest
    assert emit_report(clone, "json") == doc
    with pytest.raises(ValueError):
        parse_report(json.dumps({"rows": []}))
    with pytest.raises(ValueError):
        emit_report(table, "yaml")
