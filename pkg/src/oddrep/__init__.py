"""Which odd integers does a positive-definite quadratic form represent?

Exact forms and theta series, p-adic local densities, escalator trees,
Rankin-Selberg cusp-constant certificates and the finite checks built on them.
"""

__version__ = "0.1.0"

from .errors import FormError  # noqa: E402
from .forms import QuadraticForm, parse_form, theta_series  # noqa: E402

__all__ = ["FormError", "QuadraticForm", "parse_form", "theta_series", "__version__"]
