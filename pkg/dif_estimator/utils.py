import logging
import os
import tempfile

import numpy as np
from django.conf import settings

from dif_estimator import constants

logger = logging.getLogger(__name__)

UINT64_MASK = (1 << 64) - 1


def derive_seed(master_seed, *keys):
    """
    Splits a master 64-bit seed into an independent child seed.

    The child is the first 64-bit word of the SeedSequence state spawned
    at ``keys``, so (master, keys) always maps to the same child and
    adding new keys never changes existing children.

    :param master_seed: the experiment's master seed
    :param keys: non-negative integers naming the child (e.g. n, replicate)
    :return: a 64-bit integer seed
    """
    sequence = np.random.SeedSequence(
        int(master_seed) & UINT64_MASK, spawn_key=tuple(int(k) for k in keys)
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def philox_generator(seed):
    """Counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & UINT64_MASK))


def exact_sampler_cap():
    return getattr(settings, "DIF_EXACT_SAMPLER_CAP", constants.EXACT_SAMPLER_CAP)


def output_root():
    return getattr(settings, "DIF_OUTPUT_ROOT", os.getcwd())


def format_float(value):
    return constants.FLOAT_FORMAT.format(float(value))


def atomic_write(path, text):
    """
    Writes ``text`` to ``path`` through a temporary file in the same
    directory followed by a rename, so readers never see a partial file.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(handle, "w", newline="\n") as temp_file:
            temp_file.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise
    logger.debug(f"Wrote {path}")
    return path
