#!/usr/bin/env python3
"""Regenerates the frozen oracle fixtures under tests/fixtures.

Each oracle is written independently of the C++ sources:
  - MT19937-64 reference generator + Fisher-Yates with rejection sampling
  - FNV-1a 64 signed trigram hashing embedder
  - corpus BLEU from sacrebleu (tokenize='none', floor smoothing 0.5)

Usage: python3 tests/oracles/gen_oracles.py   (needs sacrebleu, numpy)
"""
import json
import random
import unicodedata
from pathlib import Path

import numpy as np
from sacrebleu.metrics import BLEU

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
MASK64 = (1 << 64) - 1


class MT19937_64:
    NN, MM = 312, 156
    MATRIX_A = 0xB5026F5AA96619E9
    UM, LM = 0xFFFFFFFF80000000, 0x7FFFFFFF

    def __init__(self, seed):
        self.mt = [0] * self.NN
        self.mt[0] = seed & MASK64
        for i in range(1, self.NN):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK64
        self.mti = self.NN

    def next(self):
        if self.mti >= self.NN:
            mt = self.mt
            for i in range(self.NN):
                x = (mt[i] & self.UM) | (mt[(i + 1) % self.NN] & self.LM)
                xa = x >> 1
                if x & 1:
                    xa ^= self.MATRIX_A
                mt[i] = mt[(i + self.MM) % self.NN] ^ xa
            self.mti = 0
        x = self.mt[self.mti]
        self.mti += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & MASK64


def sample(pool_size, n, seed):
    rng = MT19937_64(seed)
    order = list(range(pool_size))

    def bounded(r):
        threshold = ((1 << 64) - r) % r
        x = rng.next()
        while x < threshold:
            x = rng.next()
        return x % r

    for i in range(pool_size, 1, -1):
        j = bounded(i)
        order[i - 1], order[j] = order[j], order[i - 1]
    return order[:n]


def fnv1a64(data: bytes):
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK64
    return h


def fnv_embed(text, dim):
    norm = unicodedata.normalize("NFC", text)
    cps = list(norm)
    acc = [0.0] * dim
    grams = ["".join(cps[i:i + 3]) for i in range(len(cps) - 2)] if len(cps) >= 3 else cps
    for g in grams:
        h = fnv1a64(g.encode("utf-8"))
        acc[h % dim] += 1.0 if h % 2 == 0 else -1.0
    if all(v == 0.0 for v in acc):
        acc[fnv1a64(norm.encode("utf-8")) % dim] = 1.0
    length = sum(v * v for v in acc) ** 0.5
    return [float(np.float32(v / length)) for v in acc]


def write_json(name, obj):
    (FIXTURES / name).write_text(json.dumps(obj, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def shuffle_fixture():
    cases = []
    for seed in (1, 2, 42, 2**63 + 5):
        cases.append({"pool": 10, "n": 10, "seed": str(seed), "order": sample(10, 10, seed)})
    cases.append({"pool": 4, "n": 3, "seed": "42", "order": sample(4, 3, 42)})
    cases.append({"pool": 1000, "n": 7, "seed": "7", "order": sample(1000, 7, 7)})
    write_json("oracle_shuffle.json", cases)


def fnv_fixture():
    texts = ["ata", "A ki i je ata, a ki i je iyo, ki omi o maa ye ni loju", "Ìwà l'ẹ̀wà", "ab", "", "aaaa"]
    cases = []
    for t in texts:
        for dim in (8, 64):
            cases.append({"text": t, "dim": dim, "vector": fnv_embed(t, dim)})
    write_json("oracle_fnv.json", cases)


WORDS = ("the elder child water fire pepper salt house road market patience character hand pot tree forest "
         "home world path goal basket word beauty consequence choice learns teaches eats walks must cannot "
         "never always good old young many one two every each who what when where with from into over").split()


def sentence(rng, lo, hi):
    return [rng.choice(WORDS) for _ in range(rng.randint(lo, hi))]


def perturb(rng, ref):
    out = list(ref)
    for _ in range(rng.randint(0, 4)):
        op = rng.random()
        if op < 0.4 and out:
            out[rng.randrange(len(out))] = rng.choice(WORDS)
        elif op < 0.7 and len(out) > 1:
            del out[rng.randrange(len(out))]
        else:
            out.insert(rng.randint(0, len(out)), rng.choice(WORDS))
    return out


def sacre(pairs):
    bleu = BLEU(tokenize="none", smooth_method="floor", smooth_value=0.5)
    s = bleu.corpus_score([c for c, _ in pairs], [[r for _, r in pairs]])
    return s.score


def comparable(pairs):
    # sacrebleu stops at an order with no candidate n-grams; the harness floors it instead.
    cand = [c.split() for c, _ in pairs]
    return sum(len(c) for c in cand) > 0 and any(len(c) >= 4 for c in cand)


def bleu_fixture():
    rng = random.Random(20261015)
    pairs = []
    for _ in range(50):
        ref = sentence(rng, 4, 14)
        pairs.append((" ".join(perturb(rng, ref)), " ".join(ref)))
    with open(FIXTURES / "bleu_pairs.tsv", "w", encoding="utf-8") as f:
        for c, r in pairs:
            f.write(f"{c}\t{r}\n")
    corpora = [{"name": "fixture50", "pairs": pairs, "sacrebleu": sacre(pairs)}]

    vocab = ["a", "b", "c", "d", "e"]
    made = 0
    while made < 300:
        k = rng.randint(1, 10)
        ps = []
        for _ in range(k):
            c = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 8)))
            r = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 8)))
            ps.append((c, r))
        if not comparable(ps):
            continue
        corpora.append({"name": f"random{made}", "pairs": ps, "sacrebleu": sacre(ps)})
        made += 1
    write_json("bleu_reference.json", corpora)

    with open(FIXTURES / "pairs_identical.tsv", "w", encoding="utf-8") as f:
        for _, r in pairs[:10]:
            f.write(f"{r}\t{r}\n")


if __name__ == "__main__":
    shuffle_fixture()
    fnv_fixture()
    bleu_fixture()
