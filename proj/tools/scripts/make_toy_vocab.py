# Copyright 2026 The heterospec Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds a byte-pair style vocabulary from a line corpus.

Usage: make_toy_vocab.py CORPUS SIZE OUT
"""

import collections
import json
import sys


def merge_word(word, pair):
    out, i = [], 0
    while i < len(word):
        if i + 1 < len(word) and (word[i], word[i + 1]) == pair:
            out.append(word[i] + word[i + 1])
            i += 2
        else:
            out.append(word[i])
            i += 1
    return tuple(out)


def build(lines, size):
    words = collections.Counter()
    for line in lines:
        for w in line.split(" "):
            if w:
                words[tuple(" " + w)] += 1
    vocab = sorted({c for line in lines for c in line})
    while len(vocab) < size:
        pairs = collections.Counter()
        for word, n in words.items():
            for a, b in zip(word, word[1:]):
                pairs[(a, b)] += n
        if not pairs:
            break
        best = max(pairs.items(), key=lambda kv: (kv[1], kv[0]))[0]
        vocab.append(best[0] + best[1])
        words = collections.Counter(
            {merge_word(w, best): n for w, n in words.items()})
    return vocab


def main():
    corpus, size, out = sys.argv[1], int(sys.argv[2]), sys.argv[3]
    with open(corpus) as f:
        lines = [l.rstrip("\n") for l in f if l.strip()]
    vocab = build(lines, size)
    with open(out, "w") as f:
        json.dump([{"id": i, "text": t} for i, t in enumerate(vocab)], f, indent=1)
        f.write("\n")
    print(f"{len(vocab)} tokens -> {out}")


if __name__ == "__main__":
    main()
