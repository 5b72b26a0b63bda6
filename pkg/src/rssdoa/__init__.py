"""Localization bounds and estimators for a transmitter observed by sensors
that measure received signal strength and direction of arrival."""

__version__ = "0.1.0"

from .channel import ChannelParams, RssVector, sample_rss
from .doa import ArrayParams, DoaModel, DoaVector, sample_doa
from .errors import (BroadsideSingularityError, CovarianceError, DegenerateGeometryError,
                     LocalizationError, QuadratureError, SpecialFunctionError,
                     UnlocalizableError)
from .fim import CrbResult, bound_fim, crb_from_fim, ensemble_average_crb, joint_fim, rss_fim
from .scenario import PlacementDistribution, Point2, Scenario, sample_uniform_placement

__all__ = [
    "ArrayParams", "BroadsideSingularityError", "ChannelParams", "CovarianceError",
    "CrbResult", "DegenerateGeometryError", "DoaModel", "DoaVector", "LocalizationError",
    "PlacementDistribution", "Point2", "QuadratureError", "RssVector", "Scenario",
    "SpecialFunctionError", "UnlocalizableError", "bound_fim", "crb_from_fim",
    "ensemble_average_crb", "joint_fim", "rss_fim", "sample_doa", "sample_rss",
    "sample_uniform_placement",
]
