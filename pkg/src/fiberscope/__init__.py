"""Numerical checks for extra central invariance of shift-invariant spaces on
the Heisenberg group, via operator-valued fibers of the Schrödinger representation."""

__version__ = "0.1.0"

from .errors import (ConfigParseError, CrossSectionError, DecompositionInfeasibleError,
                     FiberscopeError, GridMismatchError, InvalidConfigError, InvalidResidueError,
                     ShapeError)
from .lattice import (LatticeConfig, ResidueSystem, SectionGrid, TilingReport, annihilator,
                      build_sections, tiling_check)
from .schrodinger import (GammaSet, GroupElement, RepGrid, apply_rep, group_multiply,
                          pfaffian_weight, rep_matrix)
from .fibers import (FiberField, central_modulate, gamma_translate, hs_inner, load_fiber_field,
                     mask, masks, save_fiber_field, synthesize)
from .ranges import (DimensionFunction, RangeBasis, dimension_function, membership_residual,
                     range_function, write_dimension_csv)
from .invariance import (InvarianceReport, TestResult, beta_decompose, check_invariance, decompose,
                         measure_report, support_bound, test_containment, test_dimension,
                         test_membership, test_oracle)
from .transform import (SampledFunction, aligned_box, fiberize, gabor_gaussian,
                        intertwining_check, left_translate, load_sampled_function,
                        plancherel_check, save_sampled_function)
from .config import RunConfig, GeneratorSpec, parse_config, render_config
from .reporting import emit_plotdata, run

__all__ = [name for name in dir() if not name.startswith("_")]
