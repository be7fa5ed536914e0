import math

import numpy as np
import pytest

from abbrkit.classifier import (
    BridgeProtocolError,
    BridgeUnavailable,
    DegenerateTraining,
    Hyperparams,
    PRF,
    RemoteScorer,
    ScorerModel,
    SeedRun,
    TrainReport,
    build_vocab,
    evaluate_scorer,
    extract_features,
    load_scorer_model,
    loss_and_gradient,
    multi_seed_protocol,
    remote_score,
    save_scorer_model,
    score_token,
    scorer_identify,
    train_scorer,
)
from abbrkit.tokenization import DirtyToken, dirty_tokenize


def dt(raw, ref=None):
    token = dirty_tokenize(raw)[0]
    if ref is not None:
        token = DirtyToken(raw=token.raw, clean=token.clean,
                           starts_at=token.starts_at,
                           ends_with_stop=token.ends_with_stop,
                           sentence_ref=ref)
    return token


POSITIVES = ["l.", "št.", "gl.", "čl.", "dr.", "prof.", "n.pr.", "t.j."]
NEGATIVES = ["leta", "1881", "v", "Trstu", "je", "bil", "pravo", "Novak"]


def separable_data():
    data = [(dt(raw), True) for raw in POSITIVES]
    data += [(dt(raw), False) for raw in NEGATIVES]
    return data


class TestExtractFeatures:
    def test_short_abbreviation(self):
        feats = extract_features(dt("l."))
        assert feats.ends_with_stop
        assert feats.length == 2
        assert feats.char_ngrams["^l"] == 1
        assert feats.char_ngrams["l."] == 1

    def test_number_token(self):
        feats = extract_features(dt("1881"))
        assert feats.has_digit
        assert not feats.ends_with_stop

    def test_context_free(self):
        a = extract_features(dt("l.", ref=("d", 0, 1)))
        b = extract_features(dt("l.", ref=("e", 7, 3)))
        assert a == b

    def test_interior_stop(self):
        feats = extract_features(dt("n.pr."))
        assert feats.has_interior_stop
        assert feats.ends_with_stop


class TestScoreToken:
    def test_zero_model_scores_half(self):
        vocab = build_vocab(separable_data())
        model = ScorerModel(weights=np.zeros(len(vocab)), bias=0.0,
                            vocab=vocab, hyperparams=Hyperparams())
        for tok, _ in separable_data():
            assert score_token(model, tok) == 0.5

    def test_positive_stop_weight_pushes_probability_up(self):
        vocab = {"ends_with_stop": 0}
        model = ScorerModel(weights=np.array([5.0]), bias=0.0,
                            vocab=vocab, hyperparams=Hyperparams())
        p = score_token(model, dt("l."))
        assert p == pytest.approx(1 / (1 + math.exp(-5)))
        assert p > 0.9

    def test_score_strictly_inside_unit_interval(self):
        vocab = {"ends_with_stop": 0}
        model = ScorerModel(weights=np.array([100.0]), bias=0.0,
                            vocab=vocab, hyperparams=Hyperparams())
        assert 0.0 < score_token(model, dt("x.")) < 1.0 or \
            score_token(model, dt("x.")) == pytest.approx(1.0)

    def test_threshold_tie_resolves_negative(self):
        vocab = {"ends_with_stop": 0}
        model = ScorerModel(weights=np.zeros(1), bias=0.0,
                            vocab=vocab, hyperparams=Hyperparams())
        result = scorer_identify([dt("l.")], model)
        assert result.decisions == (False,)  # p == 0.5 is not above threshold


class TestTrainScorer:
    def test_separable_set_reaches_perfect_train_accuracy(self):
        data = separable_data()
        model, report = train_scorer(data, data, Hyperparams(seed=1))
        prf = evaluate_scorer(model, data)
        assert prf.f1 == 100.0
        assert report.selected_epoch <= 5

    def test_same_seed_is_bit_identical(self):
        data = separable_data()
        model_a, report_a = train_scorer(data, data, Hyperparams(seed=3))
        model_b, report_b = train_scorer(data, data, Hyperparams(seed=3))
        assert np.array_equal(model_a.weights, model_b.weights)
        assert model_a.bias == model_b.bias
        assert report_a.to_json() == report_b.to_json()

    def test_different_seeds_differ(self):
        data = separable_data()
        model_a, _ = train_scorer(data, data, Hyperparams(seed=1))
        model_b, _ = train_scorer(data, data, Hyperparams(seed=2))
        assert not np.array_equal(model_a.weights, model_b.weights)

    def test_single_class_is_degenerate(self):
        data = [(dt(raw), False) for raw in NEGATIVES]
        with pytest.raises(DegenerateTraining):
            train_scorer(data, data)

    def test_selection_maximizes_dev_f1(self):
        data = separable_data()
        _, report = train_scorer(data, data, Hyperparams(seed=5))
        best = max(m.f1 for m in report.epoch_dev)
        assert report.epoch_dev[report.selected_epoch - 1].f1 == best


class TestGradient:
    def test_analytic_gradient_matches_central_differences(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n, d = rng.integers(2, 12), rng.integers(1, 8)
            matrix = rng.normal(size=(n, d))
            labels = rng.integers(0, 2, size=n).astype(float)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            weights = rng.normal(size=d)
            bias = float(rng.normal())
            l2 = float(rng.uniform(0, 0.1))
            _, grad_w, grad_b = loss_and_gradient(weights, bias, matrix, labels, l2)
            h = 1e-6
            for j in range(d):
                delta = np.zeros(d)
                delta[j] = h
                up, _, _ = loss_and_gradient(weights + delta, bias, matrix, labels, l2)
                down, _, _ = loss_and_gradient(weights - delta, bias, matrix, labels, l2)
                numeric = (up - down) / (2 * h)
                rel = abs(grad_w[j] - numeric) / max(1.0, abs(grad_w[j]), abs(numeric))
                assert rel < 1e-6
            up, _, _ = loss_and_gradient(weights, bias + h, matrix, labels, l2)
            down, _, _ = loss_and_gradient(weights, bias - h, matrix, labels, l2)
            rel = abs(grad_b - (up - down) / (2 * h)) / max(1.0, abs(grad_b))
            assert rel < 1e-6

    def test_full_batch_descent_never_increases_loss(self):
        rng = np.random.default_rng(4)
        matrix = rng.normal(size=(30, 6))
        labels = (matrix[:, 0] > 0).astype(float)
        weights = rng.normal(size=6)
        bias = 0.0
        step = 0.05
        losses = []
        for _ in range(40):
            loss, grad_w, grad_b = loss_and_gradient(weights, bias, matrix,
                                                     labels, l2=1e-3)
            losses.append(loss)
            weights = weights - step * grad_w
            bias = bias - step * grad_b
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


class TestMultiSeedProtocol:
    def test_single_seed_has_zero_std(self):
        data = separable_data()
        report = multi_seed_protocol([7], data, data, data)
        assert all(v == 0.0 for v in report.test_summary["std"].values())

    def test_five_seeds_on_separable_set(self):
        data = separable_data()
        report = multi_seed_protocol([1, 2, 3, 4, 5], data, data, data)
        assert report.test_summary["mean"]["f1"] == 100.0
        assert report.test_summary["std"]["f1"] == 0.0
        assert report.seeds == (1, 2, 3, 4, 5)

    def test_mean_and_population_std_arithmetic(self):
        runs = tuple(
            SeedRun(seed=s, epoch_dev=(), selected_epoch=1,
                    dev=PRF(precision=v, recall=v, f1=v),
                    test=PRF(precision=v, recall=v, f1=v))
            for s, v in [(1, 90.0), (2, 100.0)])
        report = TrainReport(runs=runs)
        assert report.test_summary["mean"]["f1"] == 95.0
        assert report.test_summary["std"]["f1"] == 5.0

    def test_empty_seed_list_rejected(self):
        data = separable_data()
        with pytest.raises(ValueError):
            multi_seed_protocol([], data, data, data)

    def test_training_error_aborts_protocol(self):
        negatives_only = [(dt(raw), False) for raw in NEGATIVES]
        with pytest.raises(DegenerateTraining):
            multi_seed_protocol([1, 2], negatives_only, negatives_only,
                                negatives_only)


class TestPersistence:
    def test_roundtrip_scores_identically(self):
        data = separable_data()
        model, _ = train_scorer(data, data, Hyperparams(seed=9))
        loaded = load_scorer_model(save_scorer_model(model))
        for tok, _ in data:
            assert score_token(loaded, tok) == score_token(model, tok)
        assert loaded.hyperparams == model.hyperparams

    def test_rejects_unknown_format(self):
        with pytest.raises(ValueError):
            load_scorer_model('{"format": "other/9"}\n')


class TestRemoteScorer:
    def test_passthrough(self, fixture_server):
        endpoint, set_response = fixture_server
        set_response("/classify-token", {"p_abbr": 0.97})
        assert remote_score(endpoint, dt("l.")) == 0.97

    def test_connection_refused(self):
        with pytest.raises(BridgeUnavailable):
            remote_score("http://127.0.0.1:1", dt("l."), timeout=0.5)

    def test_missing_field(self, fixture_server):
        endpoint, set_response = fixture_server
        set_response("/classify-token", {"probability": 0.9})
        with pytest.raises(BridgeProtocolError):
            remote_score(endpoint, dt("l."))

    def test_non_json_body(self, fixture_server):
        endpoint, set_response = fixture_server
        set_response("/classify-token", b"<html>oops</html>", raw=True)
        with pytest.raises(BridgeProtocolError):
            remote_score(endpoint, dt("l."))

    def test_out_of_range_probability(self, fixture_server):
        endpoint, set_response = fixture_server
        set_response("/classify-token", {"p_abbr": 1.7})
        with pytest.raises(BridgeProtocolError):
            remote_score(endpoint, dt("l."))

    def test_boolean_p_abbr_is_rejected(self, fixture_server):
        endpoint, set_response = fixture_server
        set_response("/classify-token", {"p_abbr": True})
        with pytest.raises(BridgeProtocolError):
            remote_score(endpoint, dt("l."))

    def test_http_error_status(self, fixture_server):
        endpoint, set_response = fixture_server
        set_response("/classify-token", {"error": "boom"}, status=500)
        with pytest.raises(BridgeProtocolError):
            remote_score(endpoint, dt("l."))


class _EchoScorer:
    """Stands in for a remote scorer that answers with recorded scores."""

    def __init__(self, model):
        self.model = model

    def score(self, token):
        return score_token(self.model, token)


class TestScorerSubstitutability:
    def test_native_and_mock_remote_agree_downstream(self):
        data = separable_data()
        model, _ = train_scorer(data, data, Hyperparams(seed=2))
        tokens = [tok for tok, _ in data]
        native = scorer_identify(tokens, model)
        mock_remote = scorer_identify(tokens, _EchoScorer(model))
        assert native.decisions == mock_remote.decisions

    def test_remote_scorer_wrapper(self, fixture_server):
        endpoint, set_response = fixture_server
        set_response("/classify-token", {"p_abbr": 0.8})
        result = scorer_identify([dt("l."), dt("x")], RemoteScorer(endpoint),
                                 method_tag="remote")
        assert result.decisions == (True, True)
        assert result.method_tag == "remote"
