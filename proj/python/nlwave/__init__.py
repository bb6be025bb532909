"""Spectral Galerkin lab for damped semilinear wave equations.

Configs are YAML (or JSON) text in the same format the ``nlwave`` tool reads;
``overrides`` take ``section.key=value`` strings like ``--set``.
"""

import json

from ._core import (
    ConfigError,
    Domain,
    InvalidArgument,
    canonical_config,
    equilibria,
    evaluate,
    experiment_kinds,
    platform,
    read_trace,
    sha256_hex,
    simulate,
    version,
)

__version__ = version()


def run(text, overrides=(), kind=None):
    """Run an experiment into its output directory.

    Returns ``(exit_code, manifest)`` with the manifest as a dict.
    """
    from ._core import run as _run

    code, manifest = _run(text, list(overrides), kind)
    return code, json.loads(manifest)


__all__ = [
    "ConfigError",
    "Domain",
    "InvalidArgument",
    "canonical_config",
    "equilibria",
    "evaluate",
    "experiment_kinds",
    "platform",
    "read_trace",
    "run",
    "sha256_hex",
    "simulate",
    "version",
]
