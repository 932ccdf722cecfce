"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import cmftrack as cm


@pytest.fixture(scope="module")
def world():
    wc = cm.WorldConfig()
    wc.seed = 5
    wc.n_vars = 2
    wc.values_per_var = 3
    wc.indicators_per_value = 2
    wc.noise_vocab_size = 8
    return cm.generate_world(wc)


@pytest.fixture(scope="module")
def corpora(world):
    train = cm.generate_corpus(world, 60, 2, noise_words_per_turn=1, seed=2)
    heldout = cm.generate_corpus(world, 15, 2, noise_words_per_turn=1, seed=3)
    return train, heldout


@pytest.fixture(scope="module")
def model(corpora):
    train, _ = corpora
    config = cm.FactorConfig()
    config.k = 16
    config.seed = 3
    model, report = cm.train_model(train, config, min_count=1)
    assert report["iterations"] >= 1
    assert len(report["loss"]) == report["iterations"]
    return model


def test_model_dimensions(model):
    assert model.k() == 16
    assert model.d() == 2 * model.state_width() + model.vocab().size()
    assert model.schema().num_variables() == 2


def test_tracking_yields_normalized_beliefs(model, corpora):
    _, heldout = corpora
    dialog = heldout[0]
    beliefs = cm.track_dialog_dicts(model, dialog)
    assert len(beliefs) == len(dialog.turns)
    for belief in beliefs:
        assert set(belief) == {"var0", "var1"}
        for dist in belief.values():
            assert set(dist) == {cm.NONE_VALUE, "v1", "v2", "v3"}
            assert math.isclose(sum(dist.values()), 1.0, abs_tol=1e-9)
            assert all(p >= 0.0 for p in dist.values())


def test_heldout_accuracy(model, corpora):
    _, heldout = corpora
    report = cm.evaluate_corpus(model, heldout)
    assert report["n_dialogs"] == 15
    assert report["n_turns"] == 30
    assert report["joint_goal_accuracy"] >= 0.9


def test_state_codec(model):
    schema = model.schema()
    state = cm.encode_state(schema, {"var0": "v2"})
    decoded = cm.decode_argmax(schema, state)
    assert decoded == {"var0": "v2", "var1": cm.NONE_VALUE}


def test_archive_round_trip(model, corpora, tmp_path):
    _, heldout = corpora
    path = str(tmp_path / "model.bin")
    model.save(path)
    loaded = cm.FactorModel.load(path)

    assert (loaded.embeddings() == model.embeddings()).all()
    assert loaded.schema().to_json() == model.schema().to_json()
    assert loaded.vocab().to_json() == model.vocab().to_json()
    assert cm.track_dialog_dicts(loaded, heldout[0]) == cm.track_dialog_dicts(
        model, heldout[0]
    )


def test_transition_matrix_exports_to_scipy(corpora, world):
    import scipy.sparse

    train, _ = corpora
    vocab = cm.Vocabulary.build(train, 1)
    tm = cm.assemble_transitions(train, world.schema, vocab)
    rows = tm.rows
    assert scipy.sparse.issparse(rows)
    assert rows.shape == (tm.n(), tm.d())
    assert rows.nnz > 0
    assert tm.d() == 2 * world.schema.state_width() + vocab.size()


def test_error_mapping(tmp_path, world):
    with pytest.raises(cm.IoError):
        cm.FactorModel.load(str(tmp_path / "missing.bin"))
    with pytest.raises(cm.Error):
        cm.FactorModel.load(str(tmp_path / "missing.bin"))
    with pytest.raises(cm.SchemaError):
        world.schema.variable_index("ghost")

    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n")
    with pytest.raises(cm.DataError):
        cm.load_dialogs(str(bad))

    config = cm.FactorConfig()
    config.k = 0
    with pytest.raises(cm.DataError):
        config.validate()
