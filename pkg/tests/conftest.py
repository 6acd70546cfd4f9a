import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A small synthetic corpus (with holdout split) plus its embedding store.

    Built once per session; tests must treat both objects as read-only.
    """
    from aldas.config import PipelineConfig
    from aldas.manifest import split_holdout
    from aldas.pipeline import extract_native
    from aldas.synth import SynthSpec, generate

    out = tmp_path_factory.mktemp("corpus")
    manifest = generate(SynthSpec(n_clips=160, seed=11), out)
    manifest = split_holdout(manifest, 0.15, seed=3)
    store = extract_native(manifest, PipelineConfig())
    return manifest, store
