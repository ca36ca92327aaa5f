import numpy as np
import pytest

from webact.errors import ValidationError
from webact.fusion import (ProbabilityVector, fuse_average, fuse_product,
                           fuse_three, predict_label, temporal_average)
from webact.records import ProbabilitySeries


def vec(*values, names=None):
    names = names or tuple(f"c{i}" for i in range(len(values)))
    return ProbabilityVector(np.array(values, dtype=np.float64), names)


def random_simplex(rng, n_rows, n_cols):
    raw = rng.random((n_rows, n_cols))
    return raw / raw.sum(axis=1, keepdims=True)


class TestProbabilityVector:
    def test_validation(self):
        with pytest.raises(ValidationError):
            vec(0.7, 0.7)
        with pytest.raises(ValidationError):
            vec(1.2, -0.2)
        with pytest.raises(ValidationError):
            ProbabilityVector(np.array([0.5, 0.5]), ("a",))


class TestTemporalAverage:
    def test_single_frame_identity(self):
        series = ProbabilitySeries("v", 30, np.array([[0.25, 0.75]]), ("a", "b"))
        out = temporal_average(series)
        np.testing.assert_array_equal(out.p, [0.25, 0.75])

    def test_two_onehot_frames(self):
        series = ProbabilitySeries("v", 30, np.array([[1.0, 0.0], [0.0, 1.0]]),
                                   ("a", "b"))
        np.testing.assert_array_equal(temporal_average(series).p, [0.5, 0.5])

    def test_matches_column_mean_oracle(self):
        rng = np.random.default_rng(0)
        probs = random_simplex(rng, 5, 4)
        series = ProbabilitySeries("v", 30, probs, ("a", "b", "c", "d"))
        expected = [sum(probs[t][c] for t in range(5)) / 5 for c in range(4)]
        np.testing.assert_allclose(temporal_average(series).p, expected, atol=1e-12)

    def test_frame_permutation_invariant(self):
        rng = np.random.default_rng(1)
        probs = random_simplex(rng, 12, 3)
        series = ProbabilitySeries("v", 30, probs, ("a", "b", "c"))
        shuffled = ProbabilitySeries("v", 30, probs[rng.permutation(12)],
                                     ("a", "b", "c"))
        np.testing.assert_allclose(temporal_average(series).p,
                                   temporal_average(shuffled).p, atol=1e-12)


class TestFuseAverage:
    def test_idempotent_on_equal(self):
        a = vec(0.3, 0.7)
        np.testing.assert_array_equal(fuse_average(a, a).p, a.p)

    def test_onehot_pair(self):
        np.testing.assert_array_equal(fuse_average(vec(1.0, 0.0), vec(0.0, 1.0)).p,
                                      [0.5, 0.5])

    def test_arithmetic(self):
        out = fuse_average(vec(0.5, 0.5), vec(0.9, 0.1))
        np.testing.assert_array_equal(out.p, [0.7, 0.3])

    def test_commutative(self):
        rng = np.random.default_rng(2)
        a_vals, b_vals = random_simplex(rng, 2, 5)
        a = vec(*a_vals, names=("v", "w", "x", "y", "z"))
        b = vec(*b_vals, names=("v", "w", "x", "y", "z"))
        np.testing.assert_array_equal(fuse_average(a, b).p, fuse_average(b, a).p)

    def test_class_mismatch(self):
        with pytest.raises(ValidationError, match="class lists"):
            fuse_average(vec(0.5, 0.5, names=("a", "b")),
                         vec(0.5, 0.5, names=("a", "c")))


class TestFuseProduct:
    def test_uniform_is_identity(self):
        a = vec(0.2, 0.3, 0.5)
        u = vec(*([1 / 3] * 3))
        np.testing.assert_allclose(fuse_product(a, u).p, a.p, atol=1e-12)

    def test_renormalized_arithmetic(self):
        out = fuse_product(vec(0.5, 0.5), vec(0.9, 0.1))
        np.testing.assert_allclose(out.p, [0.9, 0.1], atol=1e-12)

    def test_agreeing_onehots(self):
        out = fuse_product(vec(1.0, 0.0), vec(1.0, 0.0))
        np.testing.assert_array_equal(out.p, [1.0, 0.0])

    def test_disjoint_onehots_degenerate(self):
        with pytest.raises(ValidationError, match="degenerate"):
            fuse_product(vec(1.0, 0.0), vec(0.0, 1.0))

    def test_commutative(self):
        rng = np.random.default_rng(3)
        a_vals, b_vals = random_simplex(rng, 2, 4)
        a, b = vec(*a_vals), vec(*b_vals)
        np.testing.assert_allclose(fuse_product(a, b).p, fuse_product(b, a).p,
                                   atol=1e-15)


class TestFuseThree:
    def test_all_uniform(self):
        u = vec(*([0.25] * 4))
        np.testing.assert_allclose(fuse_three(u, u, u).p, u.p, atol=1e-12)

    def test_equal_flows_uniform_rgb(self):
        flow = vec(0.6, 0.3, 0.1)
        rgb = vec(*([1 / 3] * 3))
        np.testing.assert_allclose(fuse_three(rgb, flow, flow).p, flow.p, atol=1e-12)

    def test_hand_computed_fixture(self):
        rgb = vec(0.5, 0.3, 0.2)
        f1 = vec(0.2, 0.5, 0.3)
        f10 = vec(0.4, 0.1, 0.5)
        mean = np.array([0.3, 0.3, 0.4])
        prod = np.array([0.5, 0.3, 0.2]) * mean
        expected = prod / prod.sum()
        np.testing.assert_allclose(fuse_three(rgb, f1, f10).p, expected, atol=1e-12)


class TestPredictLabel:
    def test_clear_argmax(self):
        pred = predict_label(vec(0.9, 0.1, names=("run", "jump")))
        assert pred.label == "run"
        assert pred.index == 0
        assert pred.probability == 0.9
        assert not pred.tie

    def test_uniform_ties_to_first(self):
        pred = predict_label(vec(*([1 / 3] * 3), names=("a", "b", "c")))
        assert pred.label == "a"
        assert pred.tie

    def test_fused_pipeline_argmax(self):
        rgb = vec(0.5, 0.3, 0.2)
        f1 = vec(0.2, 0.5, 0.3)
        f10 = vec(0.4, 0.1, 0.5)
        # hand computation: products (0.15, 0.09, 0.08) -> argmax 0
        assert predict_label(fuse_three(rgb, f1, f10)).index == 0


class TestArgmaxInvariance:
    def test_positive_constant_rescale_before_renormalization(self):
        # scaling either input by a positive constant cancels out in the
        # renormalized product, so the argmax cannot move
        rng = np.random.default_rng(5)
        for _ in range(500):
            a_vals, b_vals = random_simplex(rng, 2, 4)
            a, b = vec(*a_vals), vec(*b_vals)
            c = float(rng.uniform(0.01, 100.0))
            rescaled = ProbabilityVector(a_vals * c / (a_vals * c).sum(),
                                         a.class_names)
            assert (predict_label(fuse_product(a, b)).index
                    == predict_label(fuse_product(rescaled, b)).index)

    def test_fusion_outputs_are_valid_vectors(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a_vals, b_vals = random_simplex(rng, 2, 6)
            a, b = vec(*a_vals), vec(*b_vals)
            for fused in (fuse_average(a, b), fuse_product(a, b)):
                assert np.all(fused.p >= 0)
                assert abs(fused.p.sum() - 1.0) <= 1e-6
