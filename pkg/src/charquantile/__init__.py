"""Quantile functions from characteristic functions.

The quantile ``w(u)`` of a law with characteristic function ``phi`` is built
as a power series about the zero-quantile point ``u0``, with coefficients
from exact recurrence polynomials evaluated at density derivatives obtained
from ``phi``.  Symmetric stable laws get an asymptotic tail; the pieces feed
inverse-transform sampling, accuracy diagnostics and code generation.
"""

from .charfns import (CharFnDescriptor, from_spec, make_custom, make_gaussian, make_levy_area_loop,
                      make_levy_area_p, make_sgh, make_stable, make_stable_symmetric, make_student,
                      make_variance_gamma, stable_zero_location)
from .codegen import GeneratedCode, emit_coeff_json, emit_expression, emit_horner_c, load_coeff_json
from .diagnostics import DiagnosticsReport, parse_reference_table, reference_scan, round_trip
from .diffring import DiffPoly, compute_p_sequence, symmetric_p_values, symmetric_substitute
from .errors import (CharQuantileError, DegenerateDensityError, DivergenceError, DomainError,
                     MissingSymbolError, NonConvergenceError, ResourceLimitError, ShapeError,
                     TableParseError, ValidationError)
from .moments import (MomentVector, build_moment_vector, density, derivative_at_zero, even_moment,
                      gil_pelaez_cdf, zero_location)
from .quadrature import QuadratureConfig
from .sampler import SampleBatch, sample, sample_levy_area
from .series import CentralSeries, build_series, eval_series, horner_coeffs
from .tails import AccuracyWarning, CompositeQuantile, TailModel, choose_switch, composite_for, eval_quantile, stable_tail

__version__ = "0.1.0"
