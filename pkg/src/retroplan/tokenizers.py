"""Tokenization: regex SMILES tokenizer, character BPE, and the
frequency-sensitive template tokenizer (frequent templates collapse to a
single token, the rest falls back to BPE pieces).

Reference vocabulary sizes from the large-scale training corpus are kept
as documentation constants; desk-scale corpora train much smaller models.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .templates import TemplateLibrary, template_hash_of_smarts

REFERENCE_VOCAB_SIZES = {
    "template_bpe": 348,
    "template_frequency": 2651,
    "smiles": 121,
}

# a template must occur strictly more than this often to earn its own token
WHOLE_TEMPLATE_MIN_COUNT = 40

SPECIAL_TOKENS = ("<PAD>", "<BOS>", "<EOS>", "<UNK>")

_SMILES_TOKEN_RE = re.compile(
    r"(\[[^\]]+\]|Br|Cl|%\d{2}|[BCNOSPFIbcnosp()=#\-+\\/:~@?>*$.]|\d)"
)


def tokenize_smiles(s: str) -> list[str]:
    """Split a SMILES string into atom/bond/structure tokens.

    Bracket atoms stay single tokens; characters the pattern does not
    recognize become single-character tokens, so joining the tokens always
    reproduces the input.
    """
    tokens: list[str] = []
    pos = 0
    for m in _SMILES_TOKEN_RE.finditer(s):
        if m.start() > pos:
            tokens.extend(s[pos:m.start()])
        tokens.append(m.group(0))
        pos = m.end()
    if pos < len(s):
        tokens.extend(s[pos:])
    return tokens


class TokenizerError(ValueError):
    pass


class TargetTooSmallError(TokenizerError):
    pass


class UnknownIdError(TokenizerError):
    pass


@dataclass
class Vocabulary:
    """Contiguous token <-> id maps with special tokens up front."""

    tokens: list[str]
    specials: dict[str, int] = field(default_factory=dict)
    _ids: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self._ids = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self._ids) != len(self.tokens):
            raise TokenizerError("duplicate token in vocabulary")

    @classmethod
    def build(cls, regular_tokens, extra_specials=()) -> "Vocabulary":
        tokens = list(SPECIAL_TOKENS) + list(extra_specials)
        specials = {t: i for i, t in enumerate(tokens)}
        for t in regular_tokens:
            if t not in specials:
                tokens.append(t)
        return cls(tokens, specials)

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self._ids.get(token, self.specials.get("<UNK>", 3))

    def token_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.tokens):
            raise UnknownIdError(f"id {idx} out of range")
        return self.tokens[idx]


@dataclass
class BpeModel:
    """Ordered merge rules over a character (or pre-tokenized) alphabet."""

    alphabet: list[str]
    merges: list[tuple[str, str]]
    pre_tokenized: bool = False
    vocab: Vocabulary = field(init=False, repr=False)

    def __post_init__(self):
        tokens = list(self.alphabet)
        for a, b in self.merges:
            tokens.append(a + b)
        self.vocab = Vocabulary.build(tokens)

    def encode_tokens(self, s: str) -> list[str]:
        if not s:
            return []
        parts = tokenize_smiles(s) if self.pre_tokenized else list(s)
        for a, b in self.merges:
            merged = a + b
            out: list[str] = []
            i = 0
            while i < len(parts):
                if i + 1 < len(parts) and parts[i] == a and parts[i + 1] == b:
                    out.append(merged)
                    i += 2
                else:
                    out.append(parts[i])
                    i += 1
            parts = out
        return parts

    def encode(self, s: str) -> list[int]:
        return [self.vocab.id_of(t) for t in self.encode_tokens(s)]

    def decode(self, ids: list[int]) -> str:
        return "".join(self.vocab.token_of(i) for i in ids)

    def to_json(self) -> dict:
        return {
            "alphabet": self.alphabet,
            "merges": [list(m) for m in self.merges],
            "pre_tokenized": self.pre_tokenized,
            "specials": {t: i for t, i in self.vocab.specials.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "BpeModel":
        return cls(list(data["alphabet"]),
                   [tuple(m) for m in data["merges"]],
                   pre_tokenized=bool(data.get("pre_tokenized", False)))


def bpe_train(corpus: list[str], target_vocab: int,
              pre_tokenize: bool = False) -> BpeModel:
    """Greedy most-frequent-pair merging; ties break on the smaller pair.

    Stops at ``target_vocab`` total tokens (alphabet + merges) or when no
    adjacent pair occurs at least twice. By default the base units are raw
    characters; ``pre_tokenize`` fuses bracket atoms and two-letter
    elements into base units first (the alphabet grows accordingly).
    """
    if not corpus:
        raise TokenizerError("empty corpus")
    split = tokenize_smiles if pre_tokenize else list
    units = [split(s) for s in corpus if s]
    alphabet = sorted({u for seq in units for u in seq})
    if target_vocab < len(alphabet):
        raise TargetTooSmallError(
            f"target {target_vocab} below alphabet size {len(alphabet)}")

    sequences = units
    merges: list[tuple[str, str]] = []
    model_units = pre_tokenize
    while len(alphabet) + len(merges) < target_vocab:
        counts: dict[tuple[str, str], int] = {}
        for seq in sequences:
            for i in range(len(seq) - 1):
                pair = (seq[i], seq[i + 1])
                counts[pair] = counts.get(pair, 0) + 1
        if not counts:
            break
        best_count = max(counts.values())
        if best_count < 2:
            break
        pair = min(p for p, c in counts.items() if c == best_count)
        merges.append(pair)
        a, b = pair
        merged = a + b
        for si, seq in enumerate(sequences):
            out: list[str] = []
            i = 0
            while i < len(seq):
                if i + 1 < len(seq) and seq[i] == a and seq[i + 1] == b:
                    out.append(merged)
                    i += 2
                else:
                    out.append(seq[i])
                    i += 1
            sequences[si] = out
    return BpeModel(alphabet, merges, pre_tokenized=model_units)


@dataclass
class TemplateTokenizer:
    """Whole-token encoding for frequent library templates, BPE otherwise."""

    library: TemplateLibrary
    bpe: BpeModel
    min_count: int = WHOLE_TEMPLATE_MIN_COUNT

    def tokenize(self, template_smarts: str) -> list[str]:
        try:
            h = template_hash_of_smarts(template_smarts)
        except Exception:
            h = None
        if h is not None:
            count = self.library.lookup_hash(h)
            if count is not None and count > self.min_count:
                return [template_smarts]
        return self.bpe.encode_tokens(template_smarts)

    def whole_template_hashes(self) -> list[str]:
        return [h for h, _smarts, count in self.library.entries()
                if count > self.min_count]


def save_vocabulary(path, bpe: BpeModel, tokenizer: TemplateTokenizer | None = None,
                    extra_specials: tuple[str, ...] = ()) -> None:
    data = bpe.to_json()
    data["specials"] = {t: i for i, t in enumerate(SPECIAL_TOKENS + extra_specials)}
    data["whole_template_tokens"] = (
        tokenizer.whole_template_hashes() if tokenizer else [])
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)


def load_vocabulary(path) -> BpeModel:
    with open(path) as fh:
        return BpeModel.from_json(json.load(fh))
