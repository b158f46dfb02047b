"""Automatic score implementations against direct-arithmetic oracles."""

import math

import numpy as np
import pytest

from restyle.metrics import (FluencyModel, ScoreVector, away, joint_eval,
                             rerank_score, sim, sim_secondary, style_joint,
                             towards)
from restyle.style_space import default_style_embedder


@pytest.fixture(scope="module")
def embedder():
    return default_style_embedder()


def sv(a, t, s, **kw):
    return ScoreVector(away=a, towards=t, sim=s, **kw)


class TestScoreVector:
    def test_range_validated(self):
        with pytest.raises(ValueError):
            sv(1.2, 0.5, 0.5)
        with pytest.raises(ValueError):
            sv(0.5, 0.5, 0.5, fluency=-0.1)

    def test_dict_roundtrip(self):
        v = sv(0.9, 0.3, 0.7, fluency=0.5, aux={"meaning_secondary": 0.8})
        back = ScoreVector.from_dict(v.to_dict())
        assert back == v


class TestAwayTowards:
    def test_away_zero_at_centroid(self, embedder):
        texts = ["THE SAME STYLE HERE!!!", "THE SAME STYLE HERE!!!"]
        assert away(texts, texts[0], embedder) == pytest.approx(0.0, abs=1e-9)

    def test_away_antipodal_clamps_to_one(self):
        class Signed:
            embedder_id = "signed"
            dimension = 2

            def embed(self, text):
                from restyle.style_space import StyleEmbedding
                v = [1.0, 0.0] if text == "pos" else [-1.0, 0.0]
                return StyleEmbedding(values=np.array(v), embedder_id="signed")

        assert away(["pos"], "neg", Signed()) == 1.0

    def test_towards_single_exemplar_copy(self, embedder):
        exemplar = "a quiet mellow sentence..."
        assert towards([exemplar], exemplar, embedder) == pytest.approx(1.0)

    def test_towards_orthogonal_is_zero(self):
        class Axes:
            embedder_id = "axes"
            dimension = 2

            def embed(self, text):
                from restyle.style_space import StyleEmbedding
                v = [1.0, 0.0] if text == "x" else [0.0, 1.0]
                return StyleEmbedding(values=np.array(v), embedder_id="axes")

        assert towards(["x"], "y", Axes()) == pytest.approx(0.0)

    def test_empty_inputs_rejected(self, embedder):
        with pytest.raises(ValueError):
            away([], "output", embedder)
        with pytest.raises(ValueError):
            towards([], "output", embedder)

    def test_duplicating_full_list_keeps_scores(self, embedder):
        texts = ["ONE LOUD THING!!!", "ANOTHER LOUD THING!!!"]
        out = "a calm little reply..."
        assert away(texts, out, embedder) == pytest.approx(
            away(texts * 2, out, embedder), abs=1e-12)
        assert towards(texts, out, embedder) == pytest.approx(
            towards(texts * 2, out, embedder), abs=1e-12)


class TestSim:
    def test_identity(self):
        assert sim("the cat sat", "the cat sat") == 1.0

    def test_disjoint_content(self):
        assert sim("the cat sat on the mat", "a dog runs in a park") == 0.0

    def test_surface_variants_score_one(self):
        assert sim("THE CAT SAT!!!", "the cat sat...") == pytest.approx(1.0)

    def test_stopword_only_texts(self):
        assert sim("the of and", "the of and") == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            sim("", "x")

    def test_known_overlap_value(self):
        # Oracle: vectors cat/dog/fox -> (1,1,0) vs (1,0,1); cos = 1/2.
        assert sim("cat dog", "cat fox") == pytest.approx(0.5, abs=1e-12)


class TestSimSecondary:
    def test_identity_maps_to_one(self):
        assert sim_secondary("same text", "same text") == pytest.approx(1.0)

    def test_range_floor_is_half(self):
        # Disjoint trigrams -> raw cosine 0 -> mapped to 0.5.
        assert sim_secondary("aaaa", "zzzz") == pytest.approx(0.5, abs=0.02)


@pytest.fixture(scope="module")
def model():
    texts = [f"the {a} {n} waits by the {m}" for a in
             ("small", "big", "quiet", "bright") for n in
             ("dog", "cat", "boat", "lamp") for m in
             ("door", "river", "market", "tower")]
    return FluencyModel(texts)


class TestFluency:

    def test_training_text_beats_noise(self, model):
        # Oracle: direct likelihood comparison under the same model.
        good = "the small dog waits by the river"
        noise = "xq7 zvj qqp wkx bbn mzr yyl"[: len(good)]
        assert model.score(good) >= model.score(noise)
        assert model.mean_nll(good) < model.mean_nll(noise)

    def test_deterministic(self, model):
        t = "the quiet boat waits by the door"
        assert model.score(t) == model.score(t)

    def test_range(self, model):
        assert 0.0 <= model.score("the big cat waits by the market") <= 1.0

    def test_empty_rejected(self, model):
        with pytest.raises(ValueError):
            model.score("")


class TestRerankScore:
    def test_all_ones(self):
        assert rerank_score(sv(1.0, 1.0, 1.0)) == 1.0

    def test_away_zero_annihilates(self):
        assert rerank_score(sv(0.0, 0.9, 0.9)) == 0.0

    def test_known_value(self):
        # Oracle: sqrt(sqrt(0.9*0.3) * 0.7) = 0.60310...
        expected = math.sqrt(math.sqrt(0.9 * 0.3) * 0.7)
        assert rerank_score(sv(0.9, 0.3, 0.7)) == pytest.approx(expected, abs=1e-12)
        assert rerank_score(sv(0.9, 0.3, 0.7)) == pytest.approx(0.60310, abs=1e-5)

    def test_inner_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, t, s = rng.uniform(0, 1, 3)
            assert style_joint(a, t, s) == pytest.approx(style_joint(t, a, s))

    def test_monotone_in_each_component(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a, t, s = rng.uniform(0.01, 0.9, 3)
            base = style_joint(a, t, s)
            assert style_joint(a + 0.05, t, s) >= base
            assert style_joint(a, t + 0.05, s) >= base
            assert style_joint(a, t, s + 0.05) >= base

    def test_argmax_invariant_under_joint_power(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            cands = rng.uniform(0.01, 1.0, size=(6, 3))
            base = [style_joint(*c) for c in cands]
            powed = [style_joint(*(c ** 1.7)) for c in cands]
            assert int(np.argmax(base)) == int(np.argmax(powed))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            style_joint(1.1, 0.5, 0.5)


class TestJointEval:
    def test_all_ones(self):
        assert joint_eval(1.0, 1.0, 1.0) == 1.0

    def test_zero_annihilates(self):
        assert joint_eval(0.0, 0.9, 0.9) == 0.0

    def test_known_value(self):
        # Oracle: (0.92 * 0.80 * 0.77) ** (1/3).
        expected = (0.92 * 0.80 * 0.77) ** (1.0 / 3.0)
        assert joint_eval(0.92, 0.80, 0.77) == pytest.approx(expected, abs=1e-12)
        assert joint_eval(0.92, 0.80, 0.77) == pytest.approx(0.8276, abs=1e-3)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            joint_eval(0.5, 0.5, 1.5)
