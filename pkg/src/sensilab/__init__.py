"""sensilab: a numerical laboratory for orbit-separation sensitivity.

The package measures how measure-preserving maps of the unit interval treat
pairs of nearby points: whether almost every pair of orbits eventually
separates past a uniform constant (sensitivity), or whether the orbit-maximum
metric derived from the map behaves like an invariant metric (the signature
of rigid, rotation-like behavior).  All orbit arithmetic is exact dyadic
fixed-point; all estimates are deterministic functions of the configuration
and the seed.
"""

from .backends import BACKEND
from .classify import (DichotomyConfig, UniformityReport, Verdict,
                       ball_uniformity_check, dichotomy_classify)
from .errors import (MapMismatchError, PrecisionExhaustedError, SensilabError,
                     SpecFormatError)
from .metrics import (AxiomReport, DefectReport, MeasureEstimate, MetricSpec,
                      ScanReport, ball_measure, distance, format_metric,
                      isometry_defect, lipschitz_defect,
                      mu_compatibility_scan, parse_metric,
                      verify_metric_axioms)
from .sensitivity import (EquivalenceReport, SearchReport, SensitivityReport,
                          equivalence_check, pairwise_sensitivity_estimate,
                          sensitivity_constant_search, separation_time,
                          trapped_set_measure, w_sensitivity_estimate)
from .streams import Substream
from .systems import (ExactPoint, MapSpec, Orbit, bits_per_step, format_map,
                      golden_angle, irrational_angles, iterate, orbit,
                      parse_map, required_bits, sample_point, sample_points)

__version__ = "0.1.0"

__all__ = [
    "AxiomReport", "BACKEND", "DefectReport", "DichotomyConfig",
    "EquivalenceReport", "ExactPoint", "MapMismatchError", "MapSpec",
    "MeasureEstimate", "MetricSpec", "Orbit", "PrecisionExhaustedError",
    "ScanReport", "SearchReport", "SensilabError", "SensitivityReport",
    "SpecFormatError", "Substream", "UniformityReport", "Verdict",
    "ball_measure", "ball_uniformity_check", "bits_per_step",
    "dichotomy_classify", "distance", "equivalence_check", "format_map",
    "format_metric", "golden_angle", "irrational_angles", "isometry_defect",
    "iterate", "lipschitz_defect", "mu_compatibility_scan", "orbit",
    "pairwise_sensitivity_estimate", "parse_map", "parse_metric",
    "required_bits", "sample_point", "sample_points",
    "sensitivity_constant_search", "separation_time", "trapped_set_measure",
    "verify_metric_axioms", "w_sensitivity_estimate",
]
