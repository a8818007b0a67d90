from __future__ import annotations

import string

from hypothesis import given
from hypothesis import strategies as st

from patternbench.naming import SIMILARITY_THRESHOLD, normalize_name, resolve_name, similarity, slugify


def test_normalize_casefolds_and_collapses_whitespace():
    assert normalize_name("  Data   Preprocessing ") == "data preprocessing"
    assert normalize_name("DATA\tPREPROCESSING") == "data preprocessing"


def test_normalize_strips_trailing_punctuation():
    assert normalize_name("Custom Logic:") == "custom logic"
    assert normalize_name("Custom Logic.") == "custom logic"
    assert normalize_name("**Custom Logic**") != ""  # leading markup is not punctuation stripping's job


def test_normalize_maps_ampersand_to_and():
    assert normalize_name("Semantic Search & Matching") == normalize_name("Semantic Search and Matching")


@given(st.text(alphabet=string.printable, max_size=60))
def test_normalize_idempotent(raw):
    once = normalize_name(raw)
    assert normalize_name(once) == once


def test_slugify():
    assert slugify("Natural language understanding") == "natural-language-understanding"
    assert slugify("  Data, Organization & Categorization! ") == "data-organization-and-categorization"


def test_exact_match_beats_fuzzy():
    match = resolve_name("custom logic", ["Custom Logic", "Custom Logical"])
    assert match.resolved and match.value == "Custom Logic" and match.kind == "exact"


def test_fuzzy_resolves_close_names():
    # one token of edit distance, well above the similarity threshold
    assert similarity("data processing", "data preprocessing") >= SIMILARITY_THRESHOLD
    match = resolve_name("Data Processing", ["Data Preprocessing", "Custom Logic"])
    assert match.resolved and match.value == "Data Preprocessing" and match.kind == "fuzzy"


def test_fuzzy_rejects_distant_names():
    # dropping a whole trailing word falls below the threshold
    assert similarity("adaptive response", "adaptive response generation") < SIMILARITY_THRESHOLD
    match = resolve_name("Adaptive Response", ["Adaptive Response Generation"])
    assert not match.resolved


def test_ambiguous_fuzzy_is_reported():
    match = resolve_name("data preprocessin", ["data preprocessing", "data preprocessins"])
    assert not match.resolved
    assert match.kind == "ambiguous"


def test_no_candidates():
    assert not resolve_name("anything", []).resolved


@given(st.text(min_size=1, max_size=40))
def test_similarity_reflexive(name):
    assert similarity(name, name) == 1.0
