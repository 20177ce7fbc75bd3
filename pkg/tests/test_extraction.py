import pytest
from hypothesis import given
from hypothesis import strategies as st

from mrgd.errors import ParseError
from mrgd.extraction import Lexicon, canonicalize, extract_object_mentions

WORDS = st.lists(
    st.sampled_from(["cat", "cats", "dog", "mats", "the", "a", "runs", "blue"]),
    max_size=12,
)


@pytest.fixture
def lexicon():
    return Lexicon({"cat": "cat", "cats": "cat", "mat": "mat", "kitty": "cat"})


def test_basic_extraction(lexicon):
    mentions = extract_object_mentions("A black cat sits on two mats.", lexicon)
    assert [m.canonical for m in mentions] == ["cat", "mat"]
    assert [m.surface for m in mentions] == ["cat", "mats"]


def test_empty_caption(lexicon):
    assert extract_object_mentions("", lexicon) == []


def test_whole_word_only(lexicon):
    assert extract_object_mentions("The catalog is open.", lexicon) == []


def test_synonym_folding(lexicon):
    mentions = extract_object_mentions("A kitty and a cat.", lexicon)
    assert [m.canonical for m in mentions] == ["cat"]
    assert mentions[0].surface == "kitty"


def test_canonicalize(lexicon):
    assert canonicalize("Cats", lexicon) == "cat"
    assert canonicalize("cat", lexicon) == "cat"
    assert canonicalize("running", lexicon) is None


def test_plural_fallbacks():
    lex = Lexicon({"bus": "bus", "berry": "berry", "box": "box"})
    assert lex.lookup("buses") == "bus"
    assert lex.lookup("berries") == "berry"
    assert lex.lookup("boxes") == "box"


def test_lexicon_file_roundtrip(tmp_path):
    path = tmp_path / "objects.lex"
    path.write_text(
        "# object vocabulary\n"
        "cat: cats, kitty, kitten  # feline\n"
        "mat: mats\n"
        "\n"
    )
    lex = Lexicon.from_file(path)
    assert lex.lookup("kitten") == "cat"
    assert lex.lookup("mats") == "mat"
    assert lex.canonical_set == {"cat", "mat"}


def test_lexicon_file_parse_error(tmp_path):
    path = tmp_path / "bad.lex"
    path.write_text("cat: cats\njust words\n")
    with pytest.raises(ParseError) as exc:
        Lexicon.from_file(path)
    assert exc.value.line_no == 2


def test_every_canonical_maps_to_itself():
    lex = Lexicon({"kitty": "cat"})
    assert lex.lookup("cat") == "cat"


@given(WORDS)
def test_determinism_and_subset(words):
    lex = Lexicon({"cat": "cat", "cats": "cat", "mat": "mat"})
    caption = " ".join(words)
    first = extract_object_mentions(caption, lex)
    second = extract_object_mentions(caption, lex)
    assert first == second
    assert {m.canonical for m in first} <= lex.canonical_set


@given(WORDS, WORDS)
def test_concatenation_monotonicity(a, b):
    lex = Lexicon({"cat": "cat", "cats": "cat", "mat": "mat"})
    left = {m.canonical for m in extract_object_mentions(" ".join(a), lex)}
    joint = {m.canonical for m in extract_object_mentions(" ".join(a) + " " + " ".join(b), lex)}
    assert left <= joint
