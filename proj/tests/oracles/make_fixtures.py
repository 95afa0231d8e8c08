"""Independent reference values for the metric fixtures.

Written from the metric definitions without reading the C++ sources. Run once;
the JSON outputs are frozen under tests/fixtures.
"""
import json
import math
import random
from collections import Counter
from fractions import Fraction
from pathlib import Path

EPS = 1e-9
OUT = Path(__file__).resolve().parent.parent / "fixtures"


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def stats(candidate, references):
    matches, totals = [], []
    for n in range(1, 5):
        cand = ngrams(candidate, n)
        best = Counter()
        for ref in references:
            for g, c in ngrams(ref, n).items():
                best[g] = max(best[g], c)
        matches.append(sum(min(c, best[g]) for g, c in cand.items()))
        totals.append(sum(cand.values()))
    c = len(candidate)
    r = min((abs(len(ref) - c), len(ref)) for ref in references)[1]
    return matches, totals, c, r


def score(matches, totals, c, r):
    if c == 0:
        return 0.0
    logs = []
    for m, t in zip(matches, totals):
        if t == 0:
            continue
        p = Fraction(m, t)
        logs.append(math.log(p) if p > 0 else math.log(EPS))
    if not logs:
        return 0.0
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return bp * math.exp(sum(logs) / len(logs))


def corpus_bleu(pairs):
    M, T, C, R = [0] * 4, [0] * 4, 0, 0
    for cand, refs in pairs:
        m, t, c, r = stats(cand.split(), [x.split() for x in refs])
        M = [a + b for a, b in zip(M, m)]
        T = [a + b for a, b in zip(T, t)]
        C += c
        R += r
    return score(M, T, C, R), M, T, C, R


def self_bleu(variants):
    per = []
    for i, v in enumerate(variants):
        refs = [w.split() for j, w in enumerate(variants) if j != i]
        per.append(score(*stats(v.split(), refs)))
    return sum(sorted(per)) / len(per), per


def bleu_fixture():
    pairs = [
        ("the hotel is in the north part of town", ["the hotel is in the north of town"]),
        ("i booked a table for two at six", ["i have booked a table for two people at six"]),
        ("the train leaves at nine", ["the train leaves at nine"]),
        ("no", ["there is no such train"]),
    ]
    total, M, T, C, R = corpus_bleu([(c, r) for c, r in pairs])
    sentences = [score(*stats(c.split(), [x.split() for x in r])) for c, r in pairs]
    variants = [
        "please tell the user the hotel address and phone number",
        "tell the user the address and the phone number of the hotel",
        "give the guest the phone number and address of the chosen hotel",
    ]
    gate, per = self_bleu(variants)
    return {
        "candidates": [c for c, _ in pairs],
        "references": [r[0] for _, r in pairs],
        "corpus_bleu": total,
        "matches": M,
        "totals": T,
        "candidate_length": C,
        "reference_length": R,
        "sentence_bleu": sentences,
        "gate_variants": variants,
        "gate_self_bleu": gate,
        "gate_variant_scores": per,
        "gate_accepted": gate < 0.8,
    }


def prf_fixture():
    rng = random.Random(4242)
    labels = [f"m00/x{i}" for i in range(8)]
    predicted, gold = [], []
    for _ in range(50):
        predicted.append(sorted(rng.sample(labels, rng.randint(0, 3))))
        gold.append(sorted(rng.sample(labels, rng.randint(0, 3))))
    ps, rs, fs = [], [], []
    for p, g in zip(predicted, gold):
        p, g = set(p), set(g)
        if not p and not g:
            ps.append(Fraction(1)); rs.append(Fraction(1)); fs.append(Fraction(1))
            continue
        tp = len(p & g)
        prec = Fraction(tp, len(p)) if p else Fraction(0)
        rec = Fraction(tp, len(g)) if g else Fraction(0)
        f = 2 * prec * rec / (prec + rec) if prec + rec > 0 else Fraction(0)
        ps.append(prec); rs.append(rec); fs.append(f)
    n = len(predicted)
    return {
        "predicted": predicted,
        "gold": gold,
        "precision": float(sum(ps) / n),
        "recall": float(sum(rs) / n),
        "f1": float(sum(fs) / n),
    }


if __name__ == "__main__":
    (OUT / "bleu_fixture.json").write_text(json.dumps(bleu_fixture(), indent=1) + "\n")
    (OUT / "prf_fixture.json").write_text(json.dumps(prf_fixture(), indent=1) + "\n")
