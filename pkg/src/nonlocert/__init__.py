"""Construct multipartite orthogonal entangled-state families and certify
their strong nonlocality cut by cut."""

__version__ = "0.1.0"

from .tensor import (  # noqa: E402
    Bipartition,
    SchmidtData,
    StateSet,
    StateVector,
    Subspace,
    gram,
    inner_product,
    reduced_support,
    regroup,
    schmidt,
    superpose,
    ungroup,
)
from .constructions import (  # noqa: E402
    build_family,
    ghz_subset_3qubit,
    ghz_subset_nqubit,
    mes_set_3x3x3,
    mes_set_kpartite,
    mes_set_tripartite,
)
from .partition import effective_frame, enumerate_bipartitions, is_mes_in_frame, restrict  # noqa: E402
from .opm import find_eliminator, opm_solution_space  # noqa: E402
from .certifier import certify, find_mes_witness  # noqa: E402
from .tolerances import Tolerances  # noqa: E402
