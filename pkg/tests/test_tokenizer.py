import random
from pathlib import Path

import pytest

import schemac
from schemac.errors import DuplicateMerge, MergeWithoutVocabEntry, UnencodableByte
from schemac.tokenizer import (BpeTokenizer, HeuristicTokenizer, bytes_to_unicode, count_tokens,
                               find_nonmonotonic_witness, load_tokenizer, resolve_tokenizer,
                               split_chunks, tokenize, toy_vocab)

GPT2_DIR = Path(schemac.__file__).parent / "data" / "gpt2"


def naive_bpe(word, merges):
    """Oracle: rescan for the lowest-ranked adjacent pair, merge every
    occurrence, repeat. Quadratic and obviously correct."""
    rank = {m: i for i, m in enumerate(merges)}
    parts = list(word)
    while True:
        pairs = [(rank[(a, b)], (a, b)) for a, b in zip(parts, parts[1:]) if (a, b) in rank]
        if not pairs:
            return parts
        _, (a, b) = min(pairs)
        out, i = [], 0
        while i < len(parts):
            if i + 1 < len(parts) and parts[i] == a and parts[i + 1] == b:
                out.append(a + b)
                i += 2
            else:
                out.append(parts[i])
                i += 1
        parts = out


def toy(merges):
    return BpeTokenizer(toy_vocab(a + b for a, b in merges), merges)


def test_toy_merges_chain():
    t = toy([("a", "b"), ("ab", "c")])
    assert tokenize(t, "abc") == ["abc"]
    assert tokenize(t, "abca") == ["abc", "a"]
    assert count_tokens(t, "abca") == 2


def test_merge_rank_order_wins_over_position():
    t = toy([("b", "c"), ("a", "b")])
    assert tokenize(t, "abc") == ["a", "bc"]


def test_duplicate_merge_rejected():
    with pytest.raises(DuplicateMerge):
        BpeTokenizer(toy_vocab(["ab"]), [("a", "b"), ("a", "b")])


def test_merge_without_vocab_entry_rejected():
    with pytest.raises(MergeWithoutVocabEntry):
        BpeTokenizer(toy_vocab(), [("a", "b")])


def test_no_byte_fallback_raises_on_unknown_symbol():
    t = BpeTokenizer({"a": 0}, [], byte_fallback=False)
    assert t.tokenize("a") == ["a"]
    with pytest.raises(UnencodableByte):
        t.tokenize("b")


def test_empty_string():
    t = toy([])
    assert tokenize(t, "") == []
    assert count_tokens(t, "") == 0


def test_matches_naive_oracle_on_gpt2(tok):
    rng = random.Random(7)
    words = ["compression", "Ġsearch_files", "Ġpattern", "ĠâĨĴ", "Ġ12345", "Ġunbelievably"]
    alphabet = list(bytes_to_unicode().values())
    words += ["".join(rng.choice(alphabet[:120]) for _ in range(rng.randint(1, 9))) for _ in range(200)]
    for w in words:
        assert list(tok._bpe(w)) == naive_bpe(w, tok.merges), w


def test_cross_check_transformers_gpt2(tok):
    transformers = pytest.importorskip("transformers")
    ref = transformers.GPT2Tokenizer(str(GPT2_DIR / "vocab.json"), str(GPT2_DIR / "merges.txt"))
    samples = ["Search files by content or pattern", "search_files(query:str path?:str)",
               "Status codes map as 200 -> ok and 404 -> missing.", "  leading  and\ttabs\n\nnewlines ",
               "unicode: café → naïve ≥ 3", '{"type":"function","function":{"name":"x"}}']
    for s in samples:
        assert tok.tokenize(s) == ref.tokenize(s), s
        assert tok.encode(s) == ref.encode(s), s


@pytest.mark.parametrize("seed", range(4))
def test_lossless_random_strings(tok, seed):
    rng = random.Random(seed)
    chars = "abcXYZ019 _-:|()[]{}\n\t.,;'\"é→你😀"
    for _ in range(2500):
        s = "".join(rng.choice(chars) for _ in range(rng.randint(0, 40)))
        assert tok.decode(tok.encode(s)) == s
        assert tok.detokenize(tok.tokenize(s)) == s


def test_long_text_count_matches_plain_tokenize(tok):
    text = "\n".join(f"tool_{i}(a:str b?:int)\n|Does thing {i} -> result" for i in range(40))
    assert len(text) > 256
    assert tok.count_tokens(text) == len(tok.tokenize(text))


def test_split_chunks_concatenate_back():
    text = "a\nb  \n\nc\n d"
    assert "".join(split_chunks(text)) == text


def test_count_lines_equals_joined_count(tok):
    lines = ["search_files(query:str path?:str)", "|Search files", "", "[RECAP] x"]
    assert tok.count_lines(lines) == tok.count_tokens("\n".join(lines))


def test_heuristic_is_ceil_quarter():
    h = HeuristicTokenizer()
    assert h.count_tokens("") == 0
    assert h.count_tokens("abcde") == 2
    assert not h.exact


def test_resolve_tokenizer_variants(tmp_path, tok):
    assert resolve_tokenizer("gpt2") is tok
    assert isinstance(resolve_tokenizer("heuristic"), HeuristicTokenizer)
    (tmp_path / "vocab.json").write_text('{"a": 0, "b": 1, "ab": 2}')
    (tmp_path / "merges.txt").write_text("#version: 0.2\na b\n")
    t = resolve_tokenizer(str(tmp_path / "merges.txt"))
    assert t.tokenize("ab") == ["ab"]
    assert load_tokenizer(tmp_path / "vocab.json", tmp_path / "merges.txt").merges == (("a", "b"),)


def test_witness_toy_vocab():
    # "abcd" is a single token, the shorter "abd" is not
    t = toy([("a", "b"), ("c", "d"), ("ab", "cd")])
    assert t.count_tokens("abcd") == 1
    assert t.count_tokens("abd") == 2
    assert find_nonmonotonic_witness(t, [("ab", "abcd"), ("abd", "abcd")]) == ("abd", "abcd")


def test_witness_none_when_monotone():
    t = toy([])
    assert find_nonmonotonic_witness(t, [("a", "ab"), ("xy", "xyz")]) is None


def test_witness_gpt2(tok):
    w = find_nonmonotonic_witness(tok, [("xq", "the"), ("zzzj", "information")])
    assert w is not None
    s1, s2 = w
    assert len(s1) < len(s2) and tok.count_tokens(s1) > tok.count_tokens(s2)
