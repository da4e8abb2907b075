"""Sequence ingestion: splice-junction records, FASTA, and fuzzy encoding.

Nucleotide alphabet is A, C, G, T plus the ambiguity codes that occur in the
splice-junction data: D (not C), N (any), S (C or G), R (A or G).  Encoding
maps each base onto an evenly spaced grid of fuzzy levels in [0, 1];
ambiguity codes encode as the mean of their constituent base codes and may
fall off the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

BASES = "ACGT"

AMBIGUITY = {
    "D": "AGT",
    "N": "ACGT",
    "S": "CG",
    "R": "AG",
}

ALPHABET = frozenset(BASES) | frozenset(AMBIGUITY)

#: fixed window length of the splice-junction dataset
WINDOW = 60


class ClassLabel(Enum):
    DONOR = "Donor"
    ACCEPTOR = "Acceptor"
    NEITHER = "Neither"


#: dataset class tokens -> labels (EI = exon/intron boundary, IE = intron/exon)
CLASS_TOKENS = {
    "EI": ClassLabel.DONOR,
    "IE": ClassLabel.ACCEPTOR,
    "N": ClassLabel.NEITHER,
}

LABEL_TOKENS = {label: token for token, label in CLASS_TOKENS.items()}


class ParseError(ValueError):
    """Input rejected by a parser; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LabeledInstance:
    """One 60-base training record."""

    label: ClassLabel
    id: str
    sequence: str

    def __post_init__(self):
        if len(self.sequence) != WINDOW:
            raise ValueError(f"sequence length {len(self.sequence)} != {WINDOW}")
        bad = set(self.sequence) - ALPHABET
        if bad:
            raise ValueError(f"unknown nucleotide code(s): {sorted(bad)}")


@dataclass(frozen=True)
class GenomicSequence:
    """A named nucleotide sequence of arbitrary length (scan-mode input)."""

    name: str
    bases: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("sequence name must be non-empty")
        if not self.bases:
            raise ValueError(f"sequence {self.name!r} is empty")

    def __len__(self):
        return len(self.bases)


def _default_symbol_map(n):
    # base letters in alphabetical order on the grid j/(n-1)
    codes = {b: j / (n - 1) for j, b in enumerate(BASES)}
    for sym, members in AMBIGUITY.items():
        codes[sym] = sum(codes[b] for b in members) / len(members)
    return codes


@dataclass(frozen=True)
class FuzzyEncoder:
    """Maps nucleotide symbols to fuzzy cell values on the grid j/(n-1).

    The default 4-level encoder assigns A=0, C=1/3, G=2/3, T=1; ambiguity
    codes get the mean of their base codes.  A custom ``symbol_map`` may be
    supplied as long as the four base codes lie on the grid.
    """

    n: int = 4
    symbol_map: dict[str, float] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 fuzzy levels")
        if self.symbol_map is None:
            object.__setattr__(self, "symbol_map", _default_symbol_map(self.n))
        grid = {j / (self.n - 1) for j in range(self.n)}
        for b in BASES:
            if b not in self.symbol_map:
                raise ValueError(f"symbol map lacks base {b}")
            if self.symbol_map[b] not in grid:
                raise ValueError(f"code for {b} is off the {self.n}-level grid")
        for sym, v in self.symbol_map.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"code for {sym} outside [0, 1]")
        lut = np.full(256, np.nan)
        for sym, v in self.symbol_map.items():
            lut[ord(sym)] = v
        object.__setattr__(self, "_lut", lut)

    def encode(self, sequence) -> np.ndarray:
        """Encode a symbol string (or iterable of symbols) to a float vector."""
        if not isinstance(sequence, str):
            sequence = "".join(sequence)
        raw = np.frombuffer(sequence.encode("ascii"), dtype=np.uint8)
        out = self._lut[raw]
        if np.isnan(out).any():
            bad = sorted({sequence[i] for i in np.flatnonzero(np.isnan(out))})
            raise ValueError(f"unknown nucleotide code(s): {bad}")
        return out

    def complement_code(self, symbol) -> float:
        """Fuzzy code of the base-set complement of ``symbol``.

        Pure bases map A<->T, C<->G; ambiguity sets are complemented
        element-wise and encoded as the mean of the complemented set, so the
        result may have no symbol of its own (e.g. the complement of R).
        """
        comp = {"A": "T", "C": "G", "G": "C", "T": "A"}
        members = AMBIGUITY.get(symbol, symbol)
        if any(m not in comp for m in members):
            raise ValueError(f"unknown nucleotide code: {symbol}")
        # encode the complemented set the same way ambiguity sets are encoded:
        # mean over alphabetically ordered members, so self-complementary sets
        # (N, S) keep exactly their own code
        flipped = sorted(comp[m] for m in members)
        return sum(self.symbol_map[m] for m in flipped) / len(flipped)


def encode(sequence, encoder: FuzzyEncoder) -> np.ndarray:
    """Encode a nucleotide sequence into a fuzzy CA configuration."""
    return encoder.encode(sequence)


def encode_batch(sequences: Iterable[str], encoder: FuzzyEncoder) -> np.ndarray:
    """Encode equal-length sequences into one (m, L) configuration matrix."""
    return np.stack([encoder.encode(s) for s in sequences])


def reverse_complement_codes(bases: str, encoder: FuzzyEncoder) -> np.ndarray:
    """Fuzzy encoding of the reverse complement of ``bases``.

    Works at the code level so that ambiguity symbols whose complement set
    has no letter of its own (R, D) are still handled.
    """
    return np.array([encoder.complement_code(s) for s in reversed(bases)])


def _iter_lines(stream):
    if isinstance(stream, bytes):
        text = stream.decode("ascii", errors="replace")
    elif isinstance(stream, str):
        text = stream
    else:
        data = stream.read()
        text = data.decode("ascii", errors="replace") if isinstance(data, bytes) else data
    return text.splitlines()


def parse_splice_records(stream) -> list[LabeledInstance]:
    """Parse `CLASS,IDENTIFIER,SEQUENCE` records, one per line.

    Whitespace inside any field is ignored (the published data file pads
    fields with spaces).  Blank lines are skipped.  Raises ParseError with
    the 1-based line number on an unknown class token, a sequence that is
    not exactly 60 symbols after whitespace removal, or an unknown
    nucleotide code.
    """
    records = []
    for lineno, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 comma-separated fields, got {len(parts)}", lineno)
        token = parts[0].strip()
        if token not in CLASS_TOKENS:
            raise ParseError(f"unknown class token {token!r}", lineno)
        ident = parts[1].strip()
        seq = "".join(parts[2].split()).upper()
        if len(seq) != WINDOW:
            raise ParseError(f"sequence length {len(seq)} != {WINDOW}", lineno)
        bad = set(seq) - ALPHABET
        if bad:
            raise ParseError(f"unknown nucleotide code(s) {sorted(bad)}", lineno)
        records.append(LabeledInstance(CLASS_TOKENS[token], ident, seq))
    return records


def serialize_splice_records(instances: Sequence[LabeledInstance]) -> bytes:
    """Canonical `CLASS,ID,SEQ` serialization; inverse of parse_splice_records."""
    lines = [f"{LABEL_TOKENS[r.label]},{r.id},{r.sequence}" for r in instances]
    return ("\n".join(lines) + "\n" if lines else "").encode("ascii")


def parse_fasta(stream) -> list[GenomicSequence]:
    """Parse FASTA text into genomic sequences.

    Bases are case-folded to upper case.  Raises ParseError on sequence data
    before any header and on a header with no sequence under it.
    """
    sequences = []
    name = None
    chunks: list[str] = []
    header_line = 0

    def flush():
        if name is None:
            return
        seq = "".join(chunks)
        if not seq:
            raise ParseError(f"no sequence under header {name!r}", header_line)
        sequences.append(GenomicSequence(name, seq))

    for lineno, line in enumerate(_iter_lines(stream), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            name = line[1:].strip()
            if not name:
                raise ParseError("empty FASTA header", lineno)
            header_line = lineno
            chunks = []
        else:
            if name is None:
                raise ParseError("sequence data before any FASTA header", lineno)
            seq = "".join(line.split()).upper()
            bad = set(seq) - ALPHABET
            if bad:
                raise ParseError(f"unknown nucleotide code(s) {sorted(bad)}", lineno)
            chunks.append(seq)
    flush()
    return sequences


def stratified_split(instances, test_fraction, seed):
    """Deterministic stratified split into (train, test).

    Per-class test counts are round(test_fraction * class size) (banker's
    rounding), so class proportions are preserved to within one instance.
    Output lists keep the original input order.
    """
    if not 0 <= test_fraction < 1:
        raise ValueError("test_fraction must be in [0, 1)")
    rng = np.random.default_rng(seed)
    test_idx = set()
    for label in ClassLabel:
        idx = [i for i, r in enumerate(instances) if r.label == label]
        n_test = round(test_fraction * len(idx))
        chosen = rng.permutation(len(idx))[:n_test]
        test_idx.update(idx[i] for i in chosen)
    train = [r for i, r in enumerate(instances) if i not in test_idx]
    test = [r for i, r in enumerate(instances) if i in test_idx]
    return train, test
