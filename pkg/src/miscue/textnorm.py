"""Text normalization and the tokenizer boundary used by data preparation.

Normalization scheme: Unicode NFC, lowercase, strip all punctuation except
word-internal apostrophes and hyphens, collapse whitespace.  Digits are kept
as-is.  The resulting words are the comparison units for alignment and miscue
derivation everywhere else in the package.
"""

from __future__ import annotations

import unicodedata
from typing import Protocol, Sequence

# Curly apostrophes and unicode hyphens fold to ASCII before filtering so
# word-internal occurrences survive normalization.
_CHAR_FOLD = str.maketrans({"’": "'", "‐": "-", "‑": "-"})
_EDGE_CHARS = "'-"

SOT_TOKEN = "<sot>"
EOT_TOKEN = "<eot>"


class UnknownTokenError(ValueError):
    """A tokenizer without a fallback unit met an out-of-vocabulary symbol."""


def normalize_text(raw: str) -> list[str]:
    """Split ``raw`` into lowercase comparison words.

    Deterministic; empty or whitespace-only input yields an empty list.
    Normalization is a fixpoint: feeding a returned word back in returns
    the same word.
    """
    text = unicodedata.normalize("NFC", raw).lower().translate(_CHAR_FOLD)
    words: list[str] = []
    for chunk in text.split():
        kept = "".join(c if c.isalnum() or c in _EDGE_CHARS else " " for c in chunk)
        for piece in kept.split():
            word = piece.strip(_EDGE_CHARS)
            if word:
                words.append(word)
    return words


class TokenizerAdapter(Protocol):
    """Anything that maps text to token ids and back.

    ``task_ids`` are optional adapter-declared control ids emitted after the
    start-of-token id when packing training examples.
    """

    @property
    def vocab_size(self) -> int: ...

    @property
    def sot_id(self) -> int: ...

    @property
    def eot_id(self) -> int: ...

    @property
    def task_ids(self) -> tuple[int, ...]: ...

    def encode(self, text: str) -> list[int]: ...

    def decode(self, ids: Sequence[int], skip_special: bool = True) -> str: ...


class WordTokenizer:
    """Reference word-level tokenizer: one id per distinct normalized word.

    Ids are assigned in first-seen order after the two special tokens.  A
    frozen tokenizer has no fallback unit and raises ``UnknownTokenError``
    on out-of-vocabulary words; an unfrozen one grows on demand.
    """

    def __init__(self) -> None:
        self._surfaces: list[str] = [SOT_TOKEN, EOT_TOKEN]
        self._ids: dict[str, int] = {SOT_TOKEN: 0, EOT_TOKEN: 1}
        self._special_ids: dict[str, int] = {"sot": 0, "eot": 1}
        self._frozen = False

    @classmethod
    def from_texts(cls, texts: Sequence[str]) -> "WordTokenizer":
        """Build a tokenizer covering every word in ``texts``, then freeze it."""
        tok = cls()
        for text in texts:
            tok.encode(text)
        tok.freeze()
        return tok

    @property
    def vocab_size(self) -> int:
        return len(self._surfaces)

    @property
    def sot_id(self) -> int:
        return self._special_ids["sot"]

    @property
    def eot_id(self) -> int:
        return self._special_ids["eot"]

    @property
    def task_ids(self) -> tuple[int, ...]:
        return ()

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    def encode(self, text: str) -> list[int]:
        ids = []
        for word in normalize_text(text):
            token_id = self._ids.get(word)
            if token_id is None:
                if self._frozen:
                    raise UnknownTokenError(f"word {word!r} not in vocabulary")
                token_id = len(self._surfaces)
                self._surfaces.append(word)
                self._ids[word] = token_id
            ids.append(token_id)
        return ids

    def decode(self, ids: Sequence[int], skip_special: bool = True) -> str:
        special = set(self._special_ids.values())
        words = []
        for token_id in ids:
            if not 0 <= token_id < len(self._surfaces):
                raise UnknownTokenError(f"token id {token_id} out of range")
            if skip_special and token_id in special:
                continue
            words.append(self._surfaces[token_id])
        return " ".join(words)

    def save(self, path) -> None:
        """Write the vocabulary file: header of ``#special <name> <id>`` lines,
        then one token per line, id = line number from 0."""
        with open(path, "w", encoding="utf-8") as fh:
            for name in sorted(self._special_ids):
                fh.write(f"#special {name} {self._special_ids[name]}\n")
            for surface in self._surfaces:
                fh.write(surface + "\n")

    @classmethod
    def load(cls, path) -> "WordTokenizer":
        """Load a vocabulary file written by :meth:`save`; result is frozen."""
        specials: dict[str, int] = {}
        surfaces: list[str] = []
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.rstrip("\n")
                if line.startswith("#special "):
                    _, name, token_id = line.split()
                    specials[name] = int(token_id)
                elif line:
                    surfaces.append(line)
        for name in ("sot", "eot"):
            if name not in specials:
                raise ValueError(f"vocabulary file {path} lacks #special {name}")
            if not 0 <= specials[name] < len(surfaces):
                raise ValueError(f"special token {name} id {specials[name]} out of range")
        tok = cls()
        tok._surfaces = surfaces
        tok._ids = {surface: i for i, surface in enumerate(surfaces)}
        tok._special_ids = specials
        tok._frozen = True
        if len(tok._ids) != len(surfaces):
            raise ValueError(f"vocabulary file {path} contains duplicate tokens")
        return tok
