"""Weighted almost-Riemannian half-spaces: curvature, regions, geodesics, transport."""
from .errors import *  # noqa: F401,F403
from .model import Family, SpaceModel, bare, hyperbolic, infinity, plane, sphere  # noqa: F401
from .curvature import INF, EffectiveDim  # noqa: F401

__version__ = "0.1.0"
