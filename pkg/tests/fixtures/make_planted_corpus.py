"""Regenerate the planted-topic fixture corpus.

Sixty synthetic abstracts over four disjoint topic vocabularies (fifteen
each). Content words never cross topics, so clustering their keyword
embeddings should recover the four topics; domain stopwords and English
glue words are shared on purpose. Run from the repository root:

    python tests/fixtures/make_planted_corpus.py

The committed planted_corpus.jsonl is the output of this script with the
seed below; regenerating must be byte-identical.
"""

import json
import random
from pathlib import Path

SEED = 20240711
DOCS_PER_TOPIC = 15

TOPIC_VOCAB = {
    "propulsion": [
        "thruster", "propellant", "plasma", "cathode", "anode", "xenon",
        "nozzle", "combustion", "thrust", "ignition", "injector", "turbopump",
        "impulse", "electric", "hall",
    ],
    "optics": [
        "lidar", "laser", "photon", "telescope", "mirror", "wavelength",
        "optical", "detector", "infrared", "spectrometer", "beam", "aperture",
        "interferometer", "photodiode", "calibration",
    ],
    "materials": [
        "composite", "ceramic", "insulation", "alloy", "coating", "fiber",
        "resin", "ablative", "laminate", "substrate", "hardness", "corrosion",
        "sintering", "microstructure", "tensile",
    ],
    "robotics": [
        "rover", "manipulator", "autonomy", "navigation", "actuator",
        "gripper", "terrain", "locomotion", "kinematics", "planner",
        "odometry", "teleoperation", "waypoint", "slam", "chassis",
    ],
}

GLUE = ["the", "of", "a", "and", "for", "with", "to", "in", "this", "that",
        "is", "are", "was", "be", "on", "by", "from", "an"]

# Removed during preprocessing; sprinkled in to exercise the stopword path.
DOMAIN_FILLER = ["NASA", "space", "mission", "research", "spacecraft"]

SENTENCE_SHAPES = [
    "The {0} {1} {2} the {3} {4}.",
    "A {0} {1} was {2} with the {3} {4} and the {5}.",
    "This {0} {1} improves the {2} {3} for the {4}.",
    "The {0} and the {1} are {2} by the {3} {4}.",
    "An {0} {1} supports the {2} {3} in the {4} {5}.",
]


def make_doc(rng, topic, vocab, index):
    # Every topic has a head word present in all of its documents (real
    # topical corpora behave this way); a small per-document focus set makes
    # a few more words repeat, giving the extractor a frequency signal.
    head = vocab[0]
    focus = [head] + rng.sample(vocab[1:], 4)
    rest = [w for w in vocab if w not in focus]
    sentences = []
    for _ in range(rng.randint(6, 8)):
        shape = rng.choice(SENTENCE_SHAPES)
        slots = shape.count("{")
        words = []
        for _ in range(slots):
            roll = rng.random()
            if roll < 0.3:
                words.append(head)
            elif roll < 0.75:
                words.append(rng.choice(focus))
            else:
                words.append(rng.choice(rest))
        sentence = shape.format(*words)
        if rng.random() < 0.3:
            sentence = rng.choice(DOMAIN_FILLER) + " " + sentence[0].lower() + sentence[1:]
        sentences.append(sentence)
    return {
        "id": f"{topic}-{index:02d}",
        "year": 2010 + index % 6,
        "title": f"{topic.capitalize()} study {index:02d}",
        "abstract": " ".join(sentences),
        "topic": topic,
    }


def main():
    rng = random.Random(SEED)
    records = []
    for topic, vocab in TOPIC_VOCAB.items():
        for i in range(DOCS_PER_TOPIC):
            records.append(make_doc(rng, topic, vocab, i))
    out = Path(__file__).parent / "planted_corpus.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} documents -> {out}")


if __name__ == "__main__":
    main()
