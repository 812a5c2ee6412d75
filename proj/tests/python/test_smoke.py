"""Smoke tests for the pybind11 module: quick end-to-end sanity, not depth."""

import os

import pytest

import gecrag


DATA_DIR = os.environ.get("GECRAG_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


def test_version_and_exports():
    assert gecrag.__version__
    assert callable(gecrag.build_index)


def test_normalize_with_shipped_config():
    cfg = gecrag.load_normalization_config(os.path.join(DATA_DIR, "normalization", "fa_starter.tsv"))
    assert gecrag.normalize("صدا2", cfg) == "صدا۲"
    assert gecrag.normalize("  a\t b  ", gecrag.NormalizationConfig()) == "a b"


def test_tokenize_keeps_zwnj_compounds():
    compound = "می‌رود"
    assert gecrag.tokenize(compound) == [compound]
    assert gecrag.tokenize("a b a") == ["a", "b", "a"]


def test_index_retrieval_roundtrip(tmp_path):
    entries = [
        gecrag.KbEntry("d1", ["a b"], "truth one"),
        gecrag.KbEntry("d2", ["a c"], "truth two"),
        gecrag.KbEntry("d3", ["x y"], "truth three"),
    ]
    index = gecrag.build_index(entries)
    assert index.num_docs == 3
    assert index.scheme_id == "tfidf-v1"

    hits = gecrag.retrieve(index, "a b", k=2)
    assert [h.entry_id for h in hits.items] == ["d1", "d2"]
    assert hits.items[0].score == pytest.approx(1.0, abs=1e-9)

    path = str(tmp_path / "index.bin")
    gecrag.save_index(index, path)
    loaded = gecrag.load_index(path)
    rehits = gecrag.retrieve(loaded, "a b", k=2)
    assert [h.entry_id for h in rehits.items] == ["d1", "d2"]

    excluded = gecrag.retrieve(index, "a b", k=2, exclude=["d1"])
    assert [h.entry_id for h in excluded.items] == ["d2", "d3"]


def test_prompt_rendering_matches_contract():
    templates = gecrag.default_templates()
    exemplar = gecrag.KbEntry("e1", ["a p"], "a b")
    query = gecrag.HypothesisSet("q", ["x p"])
    bundle = gecrag.build_prompt([exemplar], query, 1, templates)
    assert bundle.user_text.endswith("=>Correct Transcription:")
    assert "<hypothesis1>a p</hypothesis1>" in bundle.user_text
    assert "Provide only the correct transcription if needed" in bundle.system_text
    vanilla = gecrag.build_prompt([], query, 1, templates)
    assert vanilla.user_text.startswith("Query:")


def test_align_and_score():
    assert gecrag.align(["the", "cat", "sat"], ["the", "hat", "sat"]) == (1, 0, 0)
    assert gecrag.align(["a", "b"], []) == (0, 2, 0)
    report = gecrag.score_corpus(
        [("u1", "x y z", "x q z"), ("u2", "w", "w")], gecrag.NormalizationConfig(), "demo"
    )
    assert report.corpus_wer == pytest.approx(0.25)
    assert report.condition == "demo"


def test_corrupt_is_seed_deterministic():
    table = {"cat": ["hat"], "dog": ["fog"]}
    a = gecrag.corrupt("cat dog cat dog", p_sub=0.5, seed=1, confusion_table=table, utt_id="u1")
    b = gecrag.corrupt("cat dog cat dog", p_sub=0.5, seed=1, confusion_table=table, utt_id="u1")
    assert a == b
    assert len(a) == 5
    quiet = gecrag.corrupt("cat dog", p_sub=0.0, p_del=0.0, p_ins=0.0, seed=1, utt_id="u")
    assert quiet == ["cat dog"] * 5


def test_postprocess_strips_framing():
    cfg = gecrag.NormalizationConfig()
    assert gecrag.postprocess_output("=>Correct Transcription: hello", cfg) == "hello"
    assert gecrag.postprocess_output("```\nabc\n```", cfg) == "abc"


def test_errors_surface_as_python_exceptions():
    with pytest.raises(gecrag.DataError):
        gecrag.build_index([])
    with pytest.raises(gecrag.IoError):
        gecrag.load_index("/nonexistent/index.bin")
    with pytest.raises(gecrag.ConfigError):
        gecrag.load_normalization_config(os.path.join(DATA_DIR, "templates", "default.tmpl"))
