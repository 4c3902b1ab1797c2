import pytest
from hypothesis import given
from hypothesis import strategies as st

from miscue.textnorm import UnknownTokenError, WordTokenizer, normalize_text


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("The quick, brown fox!", ["the", "quick", "brown", "fox"]),
        ("", []),
        ("don't  STOP", ["don't", "stop"]),
        ("   \t\n ", []),
        ("well-known words", ["well-known", "words"]),
        ("'quoted' —dash— end.", ["quoted", "dash", "end"]),
        ("Café au lait", ["café", "au", "lait"]),
        ("3 little pigs", ["3", "little", "pigs"]),
        ("it’s fine", ["it's", "fine"]),
    ],
)
def test_normalize_examples(raw, expected):
    assert normalize_text(raw) == expected


def test_normalize_strips_edge_punctuation_only():
    assert normalize_text("--x-- 'y' z--w") == ["x", "y", "z--w"]


def test_normalize_nfd_input_composes():
    decomposed = "café"  # e + combining acute
    assert normalize_text(decomposed) == ["café"]


@given(st.text(max_size=40))
def test_normalize_idempotent(raw):
    words = normalize_text(raw)
    assert normalize_text(" ".join(words)) == words


@given(st.text(max_size=40))
def test_normalize_word_invariants(raw):
    for word in normalize_text(raw):
        assert word
        assert word == word.lower()
        assert not word[0] in "'-" and not word[-1] in "'-"
        assert " " not in word
        assert normalize_text(word) == [word]


def test_word_tokenizer_first_seen_ids():
    tok = WordTokenizer()
    assert tok.encode("a b a") == [2, 3, 2]
    assert tok.encode("c a") == [4, 2]
    assert tok.vocab_size == 5
    assert (tok.sot_id, tok.eot_id) == (0, 1)


def test_word_tokenizer_empty():
    assert WordTokenizer().encode("") == []


def test_word_tokenizer_round_trip():
    tok = WordTokenizer()
    ids = tok.encode("The quick fox")
    assert normalize_text(tok.decode(ids)) == normalize_text("The quick fox")


def test_frozen_tokenizer_rejects_unknown():
    tok = WordTokenizer.from_texts(["a b"])
    assert tok.encode("b a") == [3, 2]
    with pytest.raises(UnknownTokenError):
        tok.encode("zebra")


def test_decode_skips_specials_by_default():
    tok = WordTokenizer.from_texts(["a b"])
    assert tok.decode([tok.sot_id, 2, 3, tok.eot_id]) == "a b"
    assert tok.decode([tok.sot_id, 2], skip_special=False) == "<sot> a"


def test_decode_out_of_range():
    tok = WordTokenizer.from_texts(["a"])
    with pytest.raises(UnknownTokenError):
        tok.decode([99])


def test_vocab_file_round_trip(tmp_path):
    tok = WordTokenizer.from_texts(["the quick fox", "don't stop"])
    path = tmp_path / "vocab.txt"
    tok.save(path)
    loaded = WordTokenizer.load(path)
    assert loaded.vocab_size == tok.vocab_size
    assert loaded.encode("quick don't fox") == tok.encode("quick don't fox")
    assert loaded.frozen
    header = path.read_text(encoding="utf-8").splitlines()[:2]
    assert header == ["#special eot 1", "#special sot 0"]


def test_vocab_file_missing_special(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("#special sot 0\n<sot>\nword\n", encoding="utf-8")
    with pytest.raises(ValueError, match="eot"):
        WordTokenizer.load(path)
