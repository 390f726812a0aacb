"""Numerical laboratory for Dirichlet eigenfunctions on horo-convex domains
in the hyperbolic plane: geodesic-ball shooting, embedded-boundary eigen
solves on the Poincare disk, pointwise log-concavity verification, and a
shifted-curvature flow that deforms boundaries toward geodesic circles."""

from .domain import StarDomain, domain_from_dict
from .errors import HyplabError

__all__ = ["StarDomain", "domain_from_dict", "HyplabError"]

__version__ = "0.1.0"
