"""Sum degrees-of-freedom analysis for MISO interference channels whose
transmitters hold CSIT of link-dependent quality.

The exact-arithmetic core (regions, rate-splitting plans, packings and the
scheme optimizer) works on :class:`fractions.Fraction`; the Monte Carlo link
simulator in :mod:`trsdof.linksim` uses numpy.
"""

from .errors import DofError
from .optimizer import (
    ALL_SCHEMES,
    SweepConfig,
    compare_schemes,
    sum_dof_rs,
    sum_dof_trs,
    sum_dof_zfbf,
)
from .regions import potential_feasibility, rs_region, zfbf_region
from .topology import (
    CsitTopology,
    fully_connected_topology,
    hierarchical_topology,
    load_topology,
    make_cyclic_topology,
    make_realistic_topology,
    parse_topology,
    validate_topology,
)
from .trs import build_trs_plan, plan_sum_dof

__version__ = "0.1.0"

__all__ = [
    "ALL_SCHEMES",
    "CsitTopology",
    "DofError",
    "SweepConfig",
    "build_trs_plan",
    "compare_schemes",
    "fully_connected_topology",
    "hierarchical_topology",
    "load_topology",
    "make_cyclic_topology",
    "make_realistic_topology",
    "parse_topology",
    "plan_sum_dof",
    "potential_feasibility",
    "rs_region",
    "sum_dof_rs",
    "sum_dof_trs",
    "sum_dof_zfbf",
    "validate_topology",
    "zfbf_region",
]
