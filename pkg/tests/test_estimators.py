"""Scikit-learn facade: transformer and regressor contracts."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from byhe.core import Wave
from byhe.estimators import HeadHeartRateRegressor, SimilarityMapTransformer
from byhe.phase import check_sim_matrix, make_label
from byhe.synth import SynthSpec, synth_bvp, synth_features


def bvp_wave(bpm=72.0, seed=0):
    return synth_bvp(SynthSpec(bpm=bpm, duration=20.0, fs=30.0, noise_snr_db=10.0, seed=seed))


def sequences(bpms, frames=120, delay=0.0, seed0=0):
    return [synth_features(b, frames, 4, delay_frames=delay, noise_sigma=0.1, seed=seed0 + k)
            for k, b in enumerate(bpms)]


class TestSimilarityMapTransformer:
    def test_params_round_trip(self):
        est = SimilarityMapTransformer(kind="ecg", n_out=32, center_offset=100, fs=60.0)
        params = est.get_params()
        assert params == {"kind": "ecg", "n_out": 32, "center_offset": 100, "fs": 60.0}
        other = SimilarityMapTransformer().set_params(**params)
        assert other.get_params() == params

    def test_clone(self):
        est = SimilarityMapTransformer(n_out=16)
        assert clone(est).get_params() == est.get_params()

    def test_fit_returns_self_and_validates(self):
        est = SimilarityMapTransformer(n_out=16)
        assert est.fit([bvp_wave()]) is est
        with pytest.raises(ValueError, match="n_out"):
            SimilarityMapTransformer(n_out=1).fit([bvp_wave()])
        with pytest.raises(ValueError, match="at least one"):
            est.fit([])

    def test_transform_single_wave(self):
        out = SimilarityMapTransformer(n_out=16).fit_transform(bvp_wave())
        assert out.shape == (1, 16, 16)
        check_sim_matrix(out[0])

    def test_transform_stacks_waves(self):
        waves = [bvp_wave(72.0), bvp_wave(96.0, seed=1)]
        out = SimilarityMapTransformer(n_out=24).fit_transform(waves)
        assert out.shape == (2, 24, 24)
        for matrix in out:
            check_sim_matrix(matrix)

    def test_matches_functional_core(self):
        wave = bvp_wave()
        out = SimilarityMapTransformer(kind="bvp", n_out=32, center_offset=200).fit_transform([wave])
        assert np.array_equal(out[0], make_label(wave, "bvp", 32, 200))

    def test_bare_rows_use_fs_parameter(self):
        wave = bvp_wave()
        est = SimilarityMapTransformer(n_out=16, fs=30.0)
        from_rows = est.fit_transform([wave.samples])
        from_wave = est.fit_transform([wave])
        assert np.array_equal(from_rows, from_wave)


@pytest.fixture(scope="module")
def fitted():
    bpms = [60.0, 75.0, 90.0, 110.0]
    est = HeadHeartRateRegressor(out_dim=16, epochs=30, learning_rate=0.02,
                                 random_state=0)
    return est.fit(sequences(bpms, seed0=100), bpms), bpms


class TestHeadHeartRateRegressor:
    def test_params_round_trip(self):
        est = HeadHeartRateRegressor(window_len=7, out_dim=12, gamma=0.0, epochs=5)
        params = est.get_params()
        assert params["window_len"] == 7
        assert params["gamma"] == 0.0
        assert clone(est).get_params() == params

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            HeadHeartRateRegressor().predict(sequences([72.0]))

    def test_fit_validates_inputs(self):
        est = HeadHeartRateRegressor(epochs=1)
        seqs = sequences([60.0, 80.0])
        with pytest.raises(ValueError, match="one bpm value"):
            est.fit(seqs, [60.0])
        with pytest.raises(ValueError, match="2-D"):
            est.fit([np.zeros(40)], [60.0])
        with pytest.raises(ValueError, match="at least one"):
            est.fit([], [])
        with pytest.raises(ValueError, match="window_len"):
            HeadHeartRateRegressor(epochs=1, window_len=50).fit(
                [np.zeros((40, 4))], [60.0])

    def test_fit_attributes(self, fitted):
        est, _ = fitted
        assert est.projection_.weights.shape == (11 * 4, 16)
        assert len(est.stats_) == 31
        assert isinstance(est.halvings_, list)
        assert not est.diverged_
        assert est.n_features_in_ == 4

    def test_predicts_held_out_rates(self, fitted):
        est, bpms = fitted
        fresh = sequences(bpms, seed0=500)
        preds = est.predict(fresh)
        assert np.all(np.abs(preds - np.asarray(bpms)) <= 3.0)

    def test_score_is_high(self, fitted):
        est, bpms = fitted
        assert est.score(sequences(bpms, seed0=700), bpms) > 0.9

    def test_predictions_ignore_feature_delay(self, fitted):
        # peak spacing quantizes single predictions to ~1 bpm steps, so the
        # invariance is asserted on the set-level error, not per sequence
        est, bpms = fitted
        plain = est.predict(sequences(bpms, frames=300, seed0=900))
        shifted = est.predict(sequences(bpms, frames=300, delay=13.7, seed0=900))
        np.testing.assert_allclose(shifted, plain, atol=2.0)
        mae_plain = np.mean(np.abs(plain - np.asarray(bpms)))
        mae_shifted = np.mean(np.abs(shifted - np.asarray(bpms)))
        assert abs(mae_plain - mae_shifted) <= 0.5

    def test_unestimable_sequence_warns_and_zeroes(self, fitted):
        est, _ = fitted
        with pytest.warns(RuntimeWarning, match="predicting 0.0"):
            preds = est.predict([np.zeros((120, 4))])
        assert preds[0] == 0.0

    def test_training_is_seeded(self):
        bpms = [60.0, 90.0]
        seqs = sequences(bpms, frames=60, seed0=42)
        a = HeadHeartRateRegressor(out_dim=8, epochs=3, random_state=1).fit(seqs, bpms)
        b = HeadHeartRateRegressor(out_dim=8, epochs=3, random_state=1).fit(seqs, bpms)
        assert np.array_equal(a.projection_.weights, b.projection_.weights)
        assert [s.total for s in a.stats_] == [s.total for s in b.stats_]
