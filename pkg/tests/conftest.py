import pytest

from sgp import SynthConfig, synth_corpus

from graphgen import random_graph_batch


@pytest.fixture(scope="session")
def thousand_graphs():
    """Seeded random full graphs shared by the heavier acceptance checks."""
    return random_graph_batch(seed=20240, count=1000, max_roads=8, max_lanes=20)


@pytest.fixture(scope="session")
def synthetic_corpus_500():
    return synth_corpus(SynthConfig(seed=42), 500)
