"""Style embedding extraction and vector algebra."""

import numpy as np
import pytest

from restyle.style_space import (FeatureStyleEmbedder, StyleEmbedding, cosine,
                                 default_style_embedder, embed,
                                 heldout_style_embedder, interpolate,
                                 mean_pool)


@pytest.fixture(scope="module")
def embedder():
    return default_style_embedder()


def vec(values, eid="test"):
    return StyleEmbedding(values=np.asarray(values, dtype=float), embedder_id=eid)


class TestEmbed:
    def test_deterministic(self, embedder):
        a = embed(embedder, "Some text, with Style!")
        b = embed(embedder, "Some text, with Style!")
        np.testing.assert_array_equal(a.values, b.values)

    def test_identical_copy_cosine_one(self, embedder):
        t = "The exact same sentence."
        assert cosine(embedder.embed(t), embedder.embed(t)) == pytest.approx(1.0)

    def test_casing_and_punctuation_shift_the_vector(self, embedder):
        # Hand-traced: uppercase ratio and '!' features differ, so the
        # unit vectors cannot coincide.
        c = cosine(embedder.embed("HELLO!!!"), embedder.embed("hello"))
        assert c < 1.0

    def test_dimension_and_unit_norm(self, embedder):
        for text in ("x", "!", "123", "a perfectly ordinary sentence."):
            e = embedder.embed(text)
            assert e.dimension == embedder.dimension == 768
            assert np.linalg.norm(e.values) == pytest.approx(1.0, abs=1e-9)

    def test_empty_text_rejected(self, embedder):
        with pytest.raises(ValueError):
            embedder.embed("   ")

    def test_heldout_embedder_differs(self, embedder):
        other = heldout_style_embedder()
        assert other.embedder_id != embedder.embedder_id
        a = embedder.embed("some words here")
        b = other.embed("some words here")
        assert not np.allclose(a.values, b.values)

    def test_dimension_floor_enforced(self):
        with pytest.raises(ValueError, match="dimension"):
            FeatureStyleEmbedder(dimension=50)


class TestStyleEmbedding:
    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            vec([1.0, float("nan")])

    def test_json_roundtrip(self, embedder):
        e = embedder.embed("roundtrip me")
        back = StyleEmbedding.from_json(e.to_json())
        np.testing.assert_array_equal(back.values, e.values)
        assert back.embedder_id == e.embedder_id


class TestMeanPool:
    def test_identity_on_singleton(self):
        v = vec([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(mean_pool([v]).values, v.values)

    def test_symmetry(self):
        pooled = mean_pool([vec([1.0, 0.0]), vec([0.0, 1.0])])
        np.testing.assert_allclose(pooled.values, [0.5, 0.5])

    def test_matches_direct_arithmetic(self):
        # Oracle: component-wise mean computed directly.
        vs = [vec([0.3, -1.2, 4.0]), vec([2.2, 0.5, -0.5]), vec([1.0, 1.0, 1.0])]
        expected = (vs[0].values + vs[1].values + vs[2].values) / 3.0
        np.testing.assert_allclose(mean_pool(vs).values, expected, atol=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        vs = [vec(rng.normal(size=8)) for _ in range(5)]
        a = mean_pool(vs).values
        b = mean_pool(vs[::-1]).values
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_k_copies_exact(self):
        v = vec([0.1, 0.2, 0.7])
        np.testing.assert_array_equal(mean_pool([v] * 4).values, v.values)

    def test_not_renormalized(self):
        pooled = mean_pool([vec([1.0, 0.0]), vec([-1.0, 0.0])])
        np.testing.assert_array_equal(pooled.values, [0.0, 0.0])

    def test_empty_and_mixed_rejected(self):
        with pytest.raises(ValueError):
            mean_pool([])
        with pytest.raises(ValueError, match="mixed"):
            mean_pool([vec([1.0]), vec([1.0], eid="other")])


class TestInterpolate:
    def test_endpoints_exact(self):
        s, t = vec([1.0, 2.0]), vec([-3.0, 4.0])
        np.testing.assert_array_equal(interpolate(s, t, 0.0).values, s.values)
        np.testing.assert_array_equal(interpolate(s, t, 1.0).values, t.values)

    def test_midpoint(self):
        s, t = vec([1.0, 0.0]), vec([0.0, 1.0])
        np.testing.assert_allclose(interpolate(s, t, 0.5).values, [0.5, 0.5])

    def test_linearity_identity(self):
        rng = np.random.default_rng(1)
        s, t = vec(rng.normal(size=16)), vec(rng.normal(size=16))
        for lam in (0.1, 0.25, 0.7):
            lhs = interpolate(s, t, lam).values + interpolate(s, t, 1 - lam).values
            np.testing.assert_allclose(lhs, s.values + t.values, atol=1e-9)

    def test_lam_range_enforced(self):
        s, t = vec([1.0]), vec([2.0])
        with pytest.raises(ValueError):
            interpolate(s, t, 1.2)
        with pytest.raises(ValueError):
            interpolate(s, t, -0.1)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            interpolate(vec([1.0]), vec([1.0, 2.0]), 0.5)


class TestCosine:
    def test_self_similarity(self):
        v = vec([0.3, 0.4, 0.5])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine(vec([1.0, 0.0]), vec([0.0, 1.0])) == pytest.approx(0.0)

    def test_known_value(self):
        # Oracle: dot = 1, norms = sqrt(2) and 1 -> 1/sqrt(2).
        assert cosine(vec([1.0, 1.0]), vec([1.0, 0.0])) == pytest.approx(
            1.0 / np.sqrt(2.0), abs=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            cosine(vec([0.0, 0.0]), vec([1.0, 0.0]))
