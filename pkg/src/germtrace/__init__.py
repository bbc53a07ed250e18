"""Exact computation with finite-state tree automorphisms and their germs.

The package decides word problems for Mealy-machine automorphisms,
computes exact Bernoulli measures of fixed sets, analyses the groupoid
of germs of cylinder shifts (Hausdorffness, dangerous points, isotropy),
and evaluates convolution-algebra elements, traces and truncated
representation matrices, all in exact rational arithmetic.
"""

from .errors import (CapExceededError, DomainError, ElementParseError,
                     GermTraceError, MachineParseError, ParseError,
                     PatternCapError, PointParseError, SingularSystemError,
                     StateCapError)
from .mealy import (Aut, Machine, Word, as_word, check_word, compose_labels,
                    distinguishing_depth, equal, format_machine, get_state_cap,
                    identity_aut, invert_label, minimize, parse_machine,
                    parse_state_expr, restrict_label, set_state_cap, word_text)
from .points import (BOUNDARY, INTERIOR, MOVED, Point, apply_to_point,
                     fixed_walk, format_point, parse_point)
from .fixedpoints import (DecayCertificate, FixCounts, boundary_fixed_point,
                          boundary_null_certificate, fixed_counts,
                          fixed_counts_csv, has_boundary_fixed_point,
                          hausdorff_witness, interiorizable, is_dangerous,
                          mu_fix_exact)
from .germs import (FreenessReport, Germ, PartialMap, bisection_product,
                    essential_freeness_report, isotropy_germs_at, unit_germ,
                    verify_invariance)
from .convalg import (AlgebraElement, Scalar, as_scalar, format_element,
                      format_scalar, get_pattern_cap, indicator, parse_element,
                      parse_scalar, parse_shift, set_pattern_cap, unit_element)
from .traces import (RepMatrix, F_eval, canonical_trace, check_positive,
                     check_tracial, isotropy_defect, isotropy_trace, rep_matrix)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
