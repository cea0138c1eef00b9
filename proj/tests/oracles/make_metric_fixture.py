#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates metric_fixture.json from NLTK sentence BLEU and a Counter-based ROUGE-1.

BLEU-n uses uniform weights over orders 1..min(n, hypothesis length), epsilon 0.1 smoothing."""
import json
import sys
from collections import Counter
from pathlib import Path

from nltk.translate.bleu_score import SmoothingFunction, sentence_bleu

PAIRS = [
    ("the cat sat on the mat", "the cat sat on the mat"),
    ("the cat sat on the mat", "the the the the the the"),
    ("the cat sat on the mat", "a dog lay under a rug"),
    ("the cat sat on the mat", "the cat"),
    ("the cat sat on the mat", "cat the mat on sat the"),
    ("a quick brown fox", "a quick brown fox jumps over the lazy dog"),
    ("we went to the market today", "we went to market"),
    ("it was a bright cold day in april", "it was a cold bright day in april"),
    ("rain falls on the green hill", "rain falls"),
    ("one two three four five six", "one two three four five seven"),
    ("red blue green", "green blue red"),
    ("the old man and the sea", "the old man and the sea and the sky"),
    ("hello", "hello"),
    ("hello world", "world"),
    ("music fills the quiet room at night", "music fills the room at night quiet"),
    ("she reads books by the window", "he reads a book by a window"),
    ("under the bridge the river runs fast", "the river runs fast under the bridge"),
    ("birds sing", "birds birds sing sing"),
    ("light and shadow and light", "light and light and shadow"),
    ("children play in the park after school", "children play after school in the park"),
]


def rouge1(ref, hyp):
    r, h = Counter(ref), Counter(hyp)
    m = sum(min(c, r[w]) for w, c in h.items())
    p = m / len(hyp) if hyp else 0.0
    rc = m / len(ref) if ref else 0.0
    f = 2 * p * rc / (p + rc) if p + rc > 0 else 0.0
    return p, rc, f


def main(out):
    smooth = SmoothingFunction(epsilon=0.1).method1
    rows = []
    for ref, hyp in PAIRS:
        r, h = ref.split(), hyp.split()
        bleu = []
        for n in range(1, 5):
            k = min(n, len(h))
            bleu.append(float(sentence_bleu([r], h, weights=tuple([1.0 / k] * k), smoothing_function=smooth)))
        p, rc, f = rouge1(r, h)
        rows.append({"reference": ref, "hypothesis": hyp, "bleu": bleu, "rouge1": {"p": p, "r": rc, "f": f}})
    n = len(rows)
    corpus = {
        "bleu": [100.0 * sum(row["bleu"][k] for row in rows) / n for k in range(4)],
        "rouge1": {key: 100.0 * sum(row["rouge1"][key] for row in rows) / n for key in ("p", "r", "f")},
    }
    Path(out).write_text(json.dumps({"pairs": rows, "corpus": corpus}, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).with_name("metric_fixture.json"))
