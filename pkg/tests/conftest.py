import json
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"

# Make the oracle helpers importable as `oracles.*`.
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from labelkit.corpus import default_stopwords, ingest  # noqa: E402
from labelkit.providers import ProviderConfig, make_providers  # noqa: E402


# Topic vocabularies planted into the synthetic fixture corpus; kept in sync
# with tests/fixtures/make_planted_corpus.py.
PLANTED_VOCAB = {
    "propulsion": {
        "thruster", "propellant", "plasma", "cathode", "anode", "xenon",
        "nozzle", "combustion", "thrust", "ignition", "injector", "turbopump",
        "impulse", "electric", "hall",
    },
    "optics": {
        "lidar", "laser", "photon", "telescope", "mirror", "wavelength",
        "optical", "detector", "infrared", "spectrometer", "beam", "aperture",
        "interferometer", "photodiode", "calibration",
    },
    "materials": {
        "composite", "ceramic", "insulation", "alloy", "coating", "fiber",
        "resin", "ablative", "laminate", "substrate", "hardness", "corrosion",
        "sintering", "microstructure", "tensile",
    },
    "robotics": {
        "rover", "manipulator", "autonomy", "navigation", "actuator",
        "gripper", "terrain", "locomotion", "kinematics", "planner",
        "odometry", "teleoperation", "waypoint", "slam", "chassis",
    },
}


def planted_topic_of(doc_id: str) -> str:
    return doc_id.rsplit("-", 1)[0]


def topic_of_label(name: str):
    """The unique planted vocabulary containing all of a label's tokens."""
    tokens = set(name.split())
    matches = [t for t, vocab in PLANTED_VOCAB.items() if tokens <= vocab]
    return matches[0] if len(matches) == 1 else None


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def planted_corpus():
    return ingest(FIXTURES / "planted_corpus.jsonl", default_stopwords())


@pytest.fixture(scope="session")
def planted_records():
    with open(FIXTURES / "planted_corpus.jsonl", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@pytest.fixture()
def mock_providers():
    return make_providers(ProviderConfig())


@pytest.fixture()
def small_corpus(tmp_path):
    """Ten short deterministic documents for plumbing tests."""
    path = tmp_path / "small.jsonl"
    topics = ["thruster plasma cathode", "lidar laser mirror"]
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(10):
            words = topics[i % 2].split()
            body = []
            for s in range(4):
                trio = [words[(i + s + j) % 3] for j in range(3)]
                body.append(f"The {trio[0]} drives the {trio[1]} through the {trio[2]}.")
            rec = {
                "id": f"doc-{i}",
                "year": 2010 + i,
                "title": f"Study {i}",
                "abstract": " ".join(body),
            }
            fh.write(json.dumps(rec) + "\n")
    return ingest(path, default_stopwords())
