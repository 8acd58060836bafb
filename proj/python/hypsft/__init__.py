"""Shellings, divergence graphs and populated patches on word-hyperbolic groups."""

from ._core import (
    ConfigError,
    ConstructionIncomplete,
    DegenerateGrowth,
    Error,
    GroupOracle,
    InputError,
    PrecisionError,
    Presentation,
    ResourceError,
    ShortlexFsa,
    analyze_growth,
    balanced_sequence,
    check_patch,
    generate_patch,
    incommensurable,
    populate,
    torsion_coloring,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
