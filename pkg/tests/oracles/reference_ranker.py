"""Independent transcription of the reference statistical keyphrase ranker.

Used only as a test oracle. Written deliberately apart from the production
extractor: occurrence lists and literal formula transcription instead of the
incremental statistics the package uses. Both follow the same published
scheme (casing, position, frequency, context diversity, sentence spread,
n-gram aggregation with interior-stopword penalization), so their top ranks
must agree on well-formed prose.
"""

from __future__ import annotations

import math
import re
from difflib import SequenceMatcher
from statistics import mean, median, stdev

_SENTENCES = re.compile(r"[.!?]+(?:\s+|$)|\n+")
_PUNCT_BREAK = re.compile(r"[,;:()\[\]{}\"“”]|\s[-–—]\s|\.\.\.")
_WORDISH = re.compile(r"^[A-Za-z0-9][A-Za-z0-9'\-]*$")


def _sentences(text):
    return [s for s in _SENTENCES.split(text) if s and s.strip()]


def _chunks(sentence):
    out = []
    for piece in _PUNCT_BREAK.split(sentence):
        words = []
        for raw in piece.split():
            raw = raw.strip(".,;:!?()[]{}\"'`")
            if raw and _WORDISH.match(raw):
                words.append(raw)
        if words:
            out.append(words)
    return out


def _acceptable(word, stopwords):
    low = word.lower()
    if low in stopwords:
        return True  # may appear inside a phrase
    return len(low) > 1 and any(c.isalpha() for c in low)


def rank(text, stopwords, max_ngram=3, top=20, dedup_threshold=0.9):
    """Rank keyphrases of ``text``; returns (phrase, score) pairs, best first."""
    sents = _sentences(text)
    structure = [ _chunks(s) for s in sents ]
    structure = [s for s in structure if s]

    # Occurrences of each lowercased word: (sentence index, position in
    # sentence, surface form).
    occurrences = {}
    for si, chunks in enumerate(structure):
        pos = 0
        for chunk in chunks:
            for w in chunk:
                occurrences.setdefault(w.lower(), []).append((si, pos, w))
                pos += 1

    # Adjacent pairs inside a chunk, for context diversity and stopword glue.
    follows = {}  # left -> {right: count}
    for chunks in structure:
        for chunk in chunks:
            lows = [w.lower() for w in chunk]
            for a, b in zip(lows, lows[1:]):
                follows.setdefault(a, {}).setdefault(b, 0)
                follows[a][b] += 1

    n_sent = len(structure)
    tf = {w: len(occ) for w, occ in occurrences.items()}
    content_words = [w for w in occurrences
                     if w not in stopwords and len(w) > 1 and any(c.isalpha() for c in w)]
    if not content_words:
        return []
    tfs = [tf[w] for w in content_words]
    tf_mean = mean(tfs)
    tf_std = stdev(tfs) if len(tfs) > 1 else 0.0
    tf_max = max(tf.values())

    preceded = {}  # right -> {left: count}
    for a, rights in follows.items():
        for b, c in rights.items():
            preceded.setdefault(b, {}).setdefault(a, 0)
            preceded[b][a] += c

    word_score = {}
    for w, occ in occurrences.items():
        upper = sum(1 for (si, pos, surf) in occ if surf[0].isupper() and pos > 0)
        acronym = sum(1 for (_, _, surf) in occ if len(surf) > 1 and surf.isupper())
        w_case = max(upper, acronym) / (1.0 + math.log(tf[w]))
        w_pos = math.log(math.log(3.0 + median(si for si, _, _ in occ)))
        w_freq = tf[w] / (tf_mean + tf_std) if tf_mean + tf_std > 0 else 0.0
        lefts = preceded.get(w, {})
        rights = follows.get(w, {})
        pl = len(lefts) / sum(lefts.values()) if lefts else 0.0
        pr = len(rights) / sum(rights.values()) if rights else 0.0
        w_rel = 1.0 + (pl + pr) * tf[w] / tf_max
        w_spread = len({si for si, _, _ in occ}) / n_sent
        word_score[w] = (w_rel * w_pos) / (w_case + w_freq / w_rel + w_spread / w_rel)

    # Candidate phrases: n-grams within a chunk, no stopword at either end,
    # no unacceptable word, no immediate repetition.
    phrase_stats = {}  # phrase -> [count, first position]
    position = 0
    for chunks in structure:
        for chunk in chunks:
            lows = [w.lower() for w in chunk]
            for i in range(len(lows)):
                for n in range(1, max_ngram + 1):
                    if i + n > len(lows):
                        break
                    gram = lows[i:i + n]
                    if gram[0] in stopwords or gram[-1] in stopwords:
                        continue
                    if any(not _acceptable(g, stopwords) for g in gram):
                        continue
                    if any(x == y for x, y in zip(gram, gram[1:])):
                        continue
                    phrase = " ".join(gram)
                    if phrase in phrase_stats:
                        phrase_stats[phrase][0] += 1
                    else:
                        phrase_stats[phrase] = [1, position + i]
            position += len(lows)

    scored = []
    for phrase, (count, first) in phrase_stats.items():
        words = phrase.split()
        numerator = 1.0
        denominator = 0.0
        for idx, w in enumerate(words):
            if w in stopwords:
                before, after = words[idx - 1], words[idx + 1]
                p_ba = follows.get(before, {}).get(w, 0) / tf[before]
                p_wa = follows.get(w, {}).get(after, 0) / tf[w]
                glue = 1.0 - p_ba * p_wa
                numerator *= 1.0 + glue
                denominator += glue
            else:
                numerator *= word_score[w]
                denominator += word_score[w]
        scored.append((numerator / (count * (1.0 + denominator)), first, phrase))
    scored.sort()

    final = []
    for score, _, phrase in scored:
        duplicate = False
        for _, kept in final:
            if SequenceMatcher(None, phrase, kept).ratio() >= dedup_threshold:
                duplicate = True
                break
        if not duplicate:
            final.append((score, phrase))
        if len(final) >= top:
            break
    return [(phrase, score) for score, phrase in final]
