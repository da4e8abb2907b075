"""Generate the bundled synthetic splice-junction dataset.

Produces data/synthetic_splice.data: 3190 comma-separated records (767 EI,
768 IE, 1655 N) of 60-base windows, mirroring the class geometry of the
public primate splice-junction collection.  Donor windows carry the GT
dinucleotide at positions 31-32 (1-based) with a consensus-like context;
acceptor windows carry AG at positions 29-30 behind a pyrimidine tract;
negatives are uniform random.  A small sprinkle of ambiguity codes
(D, N, S, R) mimics the occasional degenerate symbols of real data.

Deterministic: a fixed seed reproduces the file byte for byte.
"""

import pathlib
import sys

import numpy as np

SEED = 20260822
COUNTS = {"EI": 767, "IE": 768, "N": 1655}
WINDOW = 60
BASES = "ACGT"
AMBIGUOUS = "DNSR"
# boundary falls between window positions 30 and 31 (1-based)
DONOR_SIGNAL = 30  # 0-based index of the G in GT
ACCEPTOR_SIGNAL = 28  # 0-based index of the A in AG


def _choice(rng, letters, p=None):
    return letters[rng.choice(len(letters), p=p)]


def _weighted(rng, weights: dict) -> str:
    letters = list(weights)
    probs = np.array([weights[b] for b in letters], dtype=float)
    return _choice(rng, letters, probs / probs.sum())


def donor_window(rng) -> str:
    seq = [_choice(rng, BASES) for _ in range(WINDOW)]
    # weak exon-end consensus (MAG), then the GT signal and intron consensus
    seq[DONOR_SIGNAL - 3] = _weighted(rng, {"A": 5, "C": 4, "G": 1, "T": 1})
    seq[DONOR_SIGNAL - 2] = _weighted(rng, {"A": 6, "C": 1, "G": 2, "T": 1})
    seq[DONOR_SIGNAL - 1] = _weighted(rng, {"G": 8, "A": 1, "C": 1, "T": 1})
    seq[DONOR_SIGNAL] = "G"
    seq[DONOR_SIGNAL + 1] = "T"
    seq[DONOR_SIGNAL + 2] = _weighted(rng, {"A": 6, "G": 3, "C": 1, "T": 1})
    seq[DONOR_SIGNAL + 3] = _weighted(rng, {"A": 7, "C": 1, "G": 1, "T": 1})
    seq[DONOR_SIGNAL + 4] = _weighted(rng, {"G": 8, "A": 1, "C": 1, "T": 1})
    seq[DONOR_SIGNAL + 5] = _weighted(rng, {"T": 5, "A": 2, "C": 2, "G": 1})
    return "".join(seq)


def acceptor_window(rng) -> str:
    seq = [_choice(rng, BASES) for _ in range(WINDOW)]
    # pyrimidine tract ahead of the AG signal, then exon start
    for i in range(ACCEPTOR_SIGNAL - 16, ACCEPTOR_SIGNAL - 2):
        seq[i] = _weighted(rng, {"C": 4, "T": 5, "A": 1, "G": 1})
    seq[ACCEPTOR_SIGNAL - 2] = _weighted(rng, {"C": 6, "T": 2, "A": 1, "G": 1})
    seq[ACCEPTOR_SIGNAL - 1] = _weighted(rng, {"C": 4, "T": 4, "A": 1, "G": 1})
    seq[ACCEPTOR_SIGNAL] = "A"
    seq[ACCEPTOR_SIGNAL + 1] = "G"
    seq[ACCEPTOR_SIGNAL + 2] = _weighted(rng, {"G": 5, "A": 3, "C": 1, "T": 1})
    return "".join(seq)


def neither_window(rng) -> str:
    return "".join(_choice(rng, BASES) for _ in range(WINDOW))


def main(out_path: str) -> None:
    rng = np.random.default_rng(SEED)
    records = []
    makers = {"EI": donor_window, "IE": acceptor_window, "N": neither_window}
    names = {"EI": "DONOR", "IE": "ACCEPTOR", "N": "NEITHER"}
    for token, count in COUNTS.items():
        for serial in range(1, count + 1):
            seq = makers[token](rng)
            records.append((token, f"SYN-{names[token]}-{serial:06d}", seq))

    # sprinkle a few ambiguity codes away from the signal dinucleotides
    for _ in range(15):
        idx = int(rng.integers(len(records)))
        token, ident, seq = records[idx]
        pos = int(rng.integers(WINDOW))
        while DONOR_SIGNAL - 1 <= pos <= DONOR_SIGNAL + 2 or \
                ACCEPTOR_SIGNAL - 1 <= pos <= ACCEPTOR_SIGNAL + 2:
            pos = int(rng.integers(WINDOW))
        sym = AMBIGUOUS[rng.integers(len(AMBIGUOUS))]
        records[idx] = (token, ident, seq[:pos] + sym + seq[pos + 1:])

    order = rng.permutation(len(records))
    lines = [",".join(records[i]) for i in order]
    path = pathlib.Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    print(f"wrote {len(lines)} records to {path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/synthetic_splice.data")
