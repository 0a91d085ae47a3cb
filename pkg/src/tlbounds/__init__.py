"""Exact transfer-learning generalization bounds on finite-support domains."""

from ._accel import BACKEND
from .bounds import (BoundReport, complexity_terms, lemma1_rhs, thm1_rhs, thm2_rhs, thm3_rhs, thm4_rhs,
                     thm5_rhs, thm7_rhs)
from .divergence import (SQUARED, ZERO_ONE, LossSpec, discrepancy, hdh_divergence, key_inequality_check,
                         rademacher)
from .domains import (DiscreteDomain, LabeledSample, UnlabeledSample, empirical_risk, expected_risk,
                      mixture_domain, sample_labeled, sample_unlabeled)
from .erm import ErmResult, WeightedRiskSpec, erm, ideal_risk, multisource_ensemble, weighted_objective
from .errors import (ConfigError, GroundSetMismatchError, PreconditionError, ResourceGuardError,
                     TLBoundsError, UnsupportedClassError)
from .harness import CoverageReport, ExperimentConfig, compare_multisource, verify_bound
from .htl import (HTLModel, RegressionSample, SourcePredictor, estimate_stability_gap, htl_predict, loo_risk,
                  train_htl, truncate)
from .hypothesis import (GroundSet, Hypothesis, HypothesisClass, make_finite_class, make_threshold_class,
                         sym_diff, zero_one_risk_terms)

__version__ = "0.1.0"
