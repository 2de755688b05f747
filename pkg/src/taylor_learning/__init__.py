"""Learning real analytic functions from noiseless samples.

A density point of the sample is located by bisection, derivatives of
orders 0..N are estimated there with finite-difference stencils on the
nearby (irregular) sample points, and the resulting Taylor polynomial is
returned as the model. The package also carries the tools to check each
bound used to certify such a model: exact stencil weights, the binomial
sample-size calculator, subgaussian tail certificates and a risk split
into body and tail parts.
"""

from . import analytic, dist, fdweights, harness, kernels, learner, risk
from .analytic import AnalyticFunctionSpec, make_function
from .dist import DistributionSpec, LabeledDataset, label, make_distribution, sample
from .errors import (
    CapabilityError,
    ConfigError,
    InsufficientDataError,
    NonconvergenceError,
    TaylorLearningError,
)
from .fdweights import fd_weights
from .harness import (
    TrialConfig,
    convergence_sweep,
    estimate_sample_complexity,
    run_trial,
    success_frequency,
)
from .learner import LearnerConfig, PolynomialModel, find_density_point, fit, required_samples
from .risk import risk_decomposition, tail_bound

__version__ = "0.1.0"


def reference_config(name):
    """Load one of the shipped JSON configs by stem, e.g. ``"sin_gaussian"``."""
    import json
    from importlib import resources

    path = resources.files(__package__) / "configs" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"no shipped config named {name!r}")
    return json.loads(path.read_text())
