"""Lattice-based kernel interpolation for parametric PDE surrogates.

Core library (pure computation) plus a FastAPI service wrapper and a thin
CLI client.  The usual entry points:

- :mod:`latkern.weights`: problem parameters and weight schemes.
- :mod:`latkern.lattice`: rank-1 lattices and the CBC search.
- :mod:`latkern.interp`: kernel evaluation and circulant FFT fitting.
- :mod:`latkern.pde`: the random-field FEM testbed.
- :mod:`latkern.experiments`: the convergence harness and CSV output.
- :mod:`latkern.service.app`: the HTTP surface over all of the above.
"""

from .interp import (
    CirculantKernelSystem,
    IllConditionedKernelError,
    Interpolant,
    KernelSpec,
    ResidualError,
    evaluate,
    evaluate_shifted,
    fit,
    kernel_eval,
    kernel_first_column,
)
from .lattice import (
    GeneratingVector,
    VectorFormatError,
    cbc_construct,
    criterion_value,
    load_vector,
    node,
    nodes,
    save_vector,
)
from .pde import (
    FemProblem,
    FieldSpec,
    affine_to_periodic,
    arcsine_cdf,
    fem_assemble_solve,
    field_eval,
    l2_norm_D,
    periodic_to_affine,
    transform_cdf_distance,
)
from .specfun import bernoulli_poly, eta, stirling2, zeta
from .weights import (
    DerivedParams,
    EllipticityError,
    PodWeights,
    ProblemParams,
    ProductWeights,
    SerendipitousWeights,
    SpodWeights,
    derive_params,
    serendipitous_weights,
    spod_weights,
    weight_of_subset,
)
from .experiments import (
    ConvergenceRecord,
    ExperimentConfig,
    NodalSurrogate,
    RateFit,
    estimate_error,
    eval_points,
    fit_rate,
    run_convergence,
    theoretical_rate,
)

__version__ = "0.1.0"
