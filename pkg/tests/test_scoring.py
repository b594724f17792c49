import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vtmm.embedding import SentenceEmbedder
from vtmm.errors import EmptyEvaluation, NoFeatures, UnknownClassInVTMM
from vtmm.features import VIDEO_DIM, VideoFeature
from vtmm.net import MatchingNetwork, NetDims
from vtmm.scoring import (
    AnnotatedFeature,
    AnnotationSet,
    argmax_class,
    class_score,
    classify_standalone,
    correct,
    evaluate,
    feature_degrees,
    softmax_scores,
)


def feats(*weights, label="c"):
    return [
        AnnotatedFeature(text=f"feature {i}", weight=w, class_label=label)
        for i, w in enumerate(weights)
    ]


# independent naive reading of the weighted-average rule, kept deliberately
# separate from the implementation

def naive_score(weights, degrees, mode):
    pos = [(w, d) for w, d in zip(weights, degrees) if w > 0]
    neg = [(w, d) for w, d in zip(weights, degrees) if w < 0]
    sp = sum(w * d for w, d in pos) / sum(w for w, _ in pos) if pos else 0.0
    sn = sum(w * d for w, d in neg) / sum(w for w, _ in neg) if neg else 0.0
    return (sp, sn, sp + sn if mode == "literal" else sp - sn)


def test_single_positive_feature():
    b = class_score(feats(1.0), [0.8])
    assert (b.positive_score, b.negative_score, b.combined_score) == (0.8, 0.0, 0.8)


def test_weighted_mean_hand_computed():
    b = class_score(feats(1.0, 3.0), [0.4, 0.8])
    assert b.positive_score == pytest.approx(0.7, abs=1e-15)


def test_weight_scale_invariance():
    b = class_score(feats(2.0, 6.0), [0.4, 0.8])
    assert b.positive_score == pytest.approx(0.7, abs=1e-15)


def test_negative_only_both_modes():
    b_lit = class_score(feats(-1.0), [0.6], mode="literal")
    assert b_lit.negative_score == pytest.approx(0.6)
    assert b_lit.combined_score == pytest.approx(0.6)
    b_sub = class_score(feats(-1.0), [0.6], mode="subtractive")
    assert b_sub.combined_score == pytest.approx(-0.6)


def test_literal_combined_is_sum_of_parts():
    b = class_score(feats(1.0, -2.0, 3.0), [0.2, 0.9, 0.6], mode="literal")
    assert b.combined_score == b.positive_score + b.negative_score


def test_no_features_rejected():
    with pytest.raises(NoFeatures):
        class_score([], [])


def test_degree_feature_count_mismatch():
    with pytest.raises(ValueError):
        class_score(feats(1.0), [0.1, 0.2])


@given(
    st.lists(
        st.tuples(
            st.floats(min_value=-10, max_value=10).filter(lambda w: abs(w) > 1e-6),
            st.floats(min_value=0, max_value=1),
        ),
        min_size=1,
        max_size=8,
    ),
    st.sampled_from(["literal", "subtractive"]),
)
def test_matches_naive_oracle(pairs, mode):
    weights = [w for w, _ in pairs]
    degrees = [d for _, d in pairs]
    b = class_score(feats(*weights), degrees, mode)
    sp, sn, s = naive_score(weights, degrees, mode)
    assert b.positive_score == pytest.approx(sp, abs=1e-12)
    assert b.negative_score == pytest.approx(sn, abs=1e-12)
    assert b.combined_score == pytest.approx(s, abs=1e-12)


@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0.01, max_value=10),
            st.floats(min_value=0, max_value=1),
        ),
        min_size=1,
        max_size=8,
    )
)
def test_positive_score_within_degree_bounds(pairs):
    weights = [w for w, _ in pairs]
    degrees = [d for _, d in pairs]
    b = class_score(feats(*weights), degrees)
    assert min(degrees) - 1e-12 <= b.positive_score <= max(degrees) + 1e-12


def test_argmax_lexicographic_tie_break():
    assert argmax_class({"b": 1.0, "a": 1.0, "c": 0.5}) == "a"
    assert argmax_class({"z": 2.0, "a": 1.0}) == "z"


# --- correction ---

def test_correct_identity_at_zero():
    base = {"a": 0.3, "b": 0.5}
    out = correct(base, {"a": 0.9}, factor=0.0)
    for label, r in out.items():
        assert r.corrected_score == base[label]


def test_correct_hand_computed():
    out = correct({"a": 0.2}, {"a": 0.3}, factor=1.0)
    assert out["a"].corrected_score == pytest.approx(0.5)


def test_correct_default_factor_is_one():
    import inspect

    assert inspect.signature(correct).parameters["factor"].default == 1.0


def test_correct_unannotated_class_gets_zero():
    out = correct({"a": 0.2, "b": 0.4}, {"a": 0.1})
    assert out["b"].matching_score == 0.0
    assert out["b"].corrected_score == 0.4


def test_correct_unknown_class():
    with pytest.raises(UnknownClassInVTMM):
        correct({"a": 0.2}, {"zz": 0.1})


@given(
    st.floats(min_value=-1, max_value=1),
    st.floats(min_value=-5, max_value=5),
    st.floats(min_value=0, max_value=4),
    st.floats(min_value=0, max_value=4),
)
def test_correct_monotone_in_factor(base, match, f1, f2):
    lo, hi = min(f1, f2), max(f1, f2)
    r_lo = correct({"c": base}, {"c": match}, lo)["c"].corrected_score
    r_hi = correct({"c": base}, {"c": match}, hi)["c"].corrected_score
    if match > 0:
        assert r_hi >= r_lo
    elif match < 0:
        assert r_hi <= r_lo
    else:
        assert r_hi == r_lo


# --- evaluation ---

def test_evaluate_all_correct():
    preds = [(f"v{i}", "a", "a") for i in range(4)]
    res = evaluate(preds)
    assert res.accuracy == 1.0
    assert res.confusion == [[4]]


def test_evaluate_half():
    res = evaluate([("v1", "a", "a"), ("v2", "b", "a")])
    assert res.accuracy == 0.5


def test_evaluate_hand_tally():
    preds = [
        ("v0", "a", "a"), ("v1", "a", "a"), ("v2", "b", "a"),
        ("v3", "b", "b"), ("v4", "b", "b"), ("v5", "a", "b"), ("v6", "c", "b"),
        ("v7", "c", "c"), ("v8", "c", "c"), ("v9", "c", "c"),
    ]
    res = evaluate(preds)
    assert res.class_labels == ["a", "b", "c"]
    assert res.confusion == [[2, 1, 0], [1, 2, 1], [0, 0, 3]]
    assert res.per_class_accuracy == {"a": 2 / 3, "b": 2 / 4, "c": 1.0}
    assert res.accuracy == 7 / 10


def test_evaluate_empty():
    with pytest.raises(EmptyEvaluation):
        evaluate([])


def test_softmax_normalizes():
    out = softmax_scores({"a": 1.0, "b": 2.0, "c": 3.0})
    assert sum(out.values()) == pytest.approx(1.0)
    assert out["c"] > out["b"] > out["a"]


# --- standalone classification against the naive oracle ---

@pytest.fixture(scope="module")
def small_net():
    dims = NetDims(video_dim=VIDEO_DIM, text_dim=768, proj_dim=16, head_dims=(8, 4, 1))
    return MatchingNetwork.create(dims, rng_seed=77)


@pytest.fixture(scope="module")
def annotations():
    def f(label, text, weight):
        return AnnotatedFeature(text=text, weight=weight, class_label=label)

    return AnnotationSet(
        classes={
            "billiards": [f("billiards", "many balls on a table", 1.0),
                          f("billiards", "a person holds a stick", 2.0)],
            "swimming": [f("swimming", "a person in the water", 1.0),
                         f("swimming", "indoor", -0.5)],
            "running": [f("running", "the action is fast", 1.5)],
        }
    )


def test_classify_matches_bruteforce(small_net, annotations):
    emb = SentenceEmbedder()
    video = np.random.default_rng(5).standard_normal(VIDEO_DIM)
    ranking = classify_standalone(video, annotations, small_net, emb)

    # brute force: one forward per feature, naive aggregation, manual sort
    expected = {}
    for label, fs in annotations.classes.items():
        degrees = [small_net.forward_infer(video, emb.embed(f.text)) for f in fs]
        expected[label] = naive_score([f.weight for f in fs], degrees, "literal")[2]
    order = sorted(expected, key=lambda l: (-expected[l], l))
    assert [b.class_label for b in ranking] == order
    for b in ranking:
        assert b.combined_score == pytest.approx(expected[b.class_label], abs=1e-12)


def test_classify_dominant_class_wins(small_net):
    video = np.random.default_rng(6).standard_normal(VIDEO_DIM)
    emb = SentenceEmbedder()
    d_a = feature_degrees(video, [AnnotatedFeature("x", 1.0, "a")], small_net, emb)[0]
    d_b = feature_degrees(video, [AnnotatedFeature("y", 1.0, "b")], small_net, emb)[0]
    anns = AnnotationSet(classes={
        "a": [AnnotatedFeature("x", 1.0, "a")],
        "b": [AnnotatedFeature("y", 1.0, "b")],
    })
    ranking = classify_standalone(video, anns, small_net, emb)
    expected_first = "a" if d_a > d_b or (d_a == d_b) else "b"
    assert ranking[0].class_label == expected_first


def test_classify_exact_tie_lexicographic(small_net):
    # identical feature text in both classes produces identical degrees
    anns = AnnotationSet(classes={
        "zebra": [AnnotatedFeature("same text", 1.0, "zebra")],
        "aardvark": [AnnotatedFeature("same text", 1.0, "aardvark")],
    })
    video = np.random.default_rng(7).standard_normal(VIDEO_DIM)
    ranking = classify_standalone(video, anns, small_net, SentenceEmbedder())
    assert ranking[0].class_label == "aardvark"
    assert ranking[0].combined_score == ranking[1].combined_score


def test_classify_deterministic(small_net, annotations):
    video = np.random.default_rng(8).standard_normal(VIDEO_DIM)
    emb = SentenceEmbedder()
    a = classify_standalone(video, annotations, small_net, emb)
    b = classify_standalone(video, annotations, small_net, emb)
    assert [(x.class_label, x.combined_score) for x in a] == [
        (x.class_label, x.combined_score) for x in b
    ]


def test_classify_empty_class_rejected(small_net):
    anns = AnnotationSet(classes={"a": []})
    with pytest.raises(NoFeatures):
        classify_standalone(np.zeros(VIDEO_DIM), anns, small_net, SentenceEmbedder())


def test_classify_weight_scaling_keeps_ranking(small_net, annotations):
    video = np.random.default_rng(9).standard_normal(VIDEO_DIM)
    emb = SentenceEmbedder()
    before = [b.class_label for b in classify_standalone(video, annotations, small_net, emb)]
    scaled = AnnotationSet(classes={
        label: [
            AnnotatedFeature(f.text, f.weight * 7.3 if f.weight > 0 else f.weight, label, f.kind)
            for f in fs
        ]
        for label, fs in annotations.classes.items()
    })
    after = [b.class_label for b in classify_standalone(video, scaled, small_net, emb)]
    assert before == after


def test_videofeature_input_accepted(small_net):
    video = VideoFeature.from_vector(np.random.default_rng(1).standard_normal(VIDEO_DIM), "v1")
    anns = AnnotationSet(classes={"a": [AnnotatedFeature("t", 1.0, "a")]})
    ranking = classify_standalone(video, anns, small_net, SentenceEmbedder())
    assert len(ranking) == 1


def test_annotation_set_validation():
    anns = AnnotationSet(classes={"a": [AnnotatedFeature("x", 1.0, "a")]},
                         common_features=[("indoor", 1.0)])
    assert anns.validate() == []
    bad = AnnotationSet(common_features=[("", 1.0), ("ok", 0.0)])
    problems = bad.validate()
    assert len(problems) == 2


def test_annotation_set_roundtrip(tmp_path, annotations):
    path = tmp_path / "ann.json"
    annotations.save(path)
    loaded = AnnotationSet.load(path)
    assert loaded.to_dict() == annotations.to_dict()
