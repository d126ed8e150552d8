"""70-symbol character alphabet and one-hot tweet encoding.

A tweet becomes a 150x70 binary matrix: one row per character position
(the 140-character limit plus 10 rows of padding), one column per
alphabet symbol. Rows past the end of the text stay all-zero so padding
carries no signal.
"""

import numpy as np

from ballotbeat.errors import ConfigError, MalformedRowError, ShapeError

MAX_CHARS = 150

PAD_SYMBOL = "<pad>"
UNKNOWN_SYMBOL = "<unk>"

#: Canonical symbol order; the column index of each symbol is part of the
#: model file contract and must never change between runs.
ALPHABET_SYMBOLS = (
    "abcdefghijklmnopqrstuvwxyz"  # 0-25
    "0123456789"                  # 26-35
    " "                           # 36
    "-,;.!?:'\"/\\|_@#$%^&*~"     # 37-57
    "`"                           # 58
    "+=<>()[]{}"                  # 59-68
)


class Alphabet:
    """Ordered character set with one reserved unknown slot at the end.

    69 literal symbols plus the unknown slot give the 70 columns of a
    tweet matrix. Symbol indices are stable across runs.
    """

    def __init__(self, symbols: str = ALPHABET_SYMBOLS):
        if len(symbols) != 69:
            raise ConfigError(f"alphabet needs 69 literal symbols, got {len(symbols)}")
        if len(set(symbols)) != len(symbols):
            raise ConfigError("alphabet symbols must be unique")
        self.symbols = symbols
        self.unknown_index = len(symbols)
        self._index = {ch: i for i, ch in enumerate(symbols)}

    def __len__(self) -> int:
        return len(self.symbols) + 1

    def __contains__(self, ch: str) -> bool:
        return ch in self._index

    def index_of(self, ch: str) -> int:
        """Column index for a character; unknown characters share slot 69."""
        return self._index.get(ch, self.unknown_index)

    def symbol_at(self, index: int) -> str:
        if index == self.unknown_index:
            return UNKNOWN_SYMBOL
        return self.symbols[index]


DEFAULT_ALPHABET = Alphabet()


def fold_char(ch: str) -> str:
    """Lowercase a single character without changing its width.

    The rare characters whose lowercase form expands to several characters
    are left as-is; they are outside the alphabet and encode as unknown.
    This keeps every matrix row aligned with its input position.
    """
    low = ch.lower()
    return low if len(low) == 1 else ch


def encode_tweet(text: str, alphabet: Alphabet = DEFAULT_ALPHABET) -> np.ndarray:
    """One-hot encode a tweet as a 150x70 float matrix.

    Characters are case-folded, out-of-alphabet characters map to the
    unknown column, anything past position 150 is silently truncated, and
    the remaining rows are all-zero padding. Total over any input string.
    """
    matrix = np.zeros((MAX_CHARS, len(alphabet)), dtype=np.float64)
    for i, ch in enumerate(text[:MAX_CHARS]):
        matrix[i, alphabet.index_of(fold_char(ch))] = 1.0
    return matrix


def decode_row(row: np.ndarray, alphabet: Alphabet = DEFAULT_ALPHABET) -> str:
    """Inverse of one matrix row: the symbol, or PAD for an all-zero row."""
    row = np.asarray(row)
    if row.shape != (len(alphabet),):
        raise ShapeError(f"row has shape {row.shape}, expected ({len(alphabet)},)")
    hot = np.flatnonzero(row)
    if hot.size == 0:
        return PAD_SYMBOL
    if hot.size > 1:
        raise MalformedRowError(f"one-hot row has {hot.size} bits set")
    return alphabet.symbol_at(int(hot[0]))


def is_valid_char_matrix(matrix: np.ndarray, alphabet: Alphabet = DEFAULT_ALPHABET) -> bool:
    """Check the tweet-matrix invariants: shape, binary entries, one-hot rows."""
    matrix = np.asarray(matrix)
    if matrix.shape != (MAX_CHARS, len(alphabet)):
        return False
    if not np.isin(matrix, (0.0, 1.0)).all():
        return False
    return bool((matrix.sum(axis=1) <= 1).all())
