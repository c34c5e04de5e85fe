"""Fixed-energy (enharmonic) Dirichlet problems on networks with boundary."""
from .errors import *  # noqa: F401,F403
from .gallery import (Fixture, make_four_cycle, make_grid, make_jacobi, make_path, make_small_graph,
                      make_star)
from .harmonic import HarmonicSolution, psi, solve_dirichlet
from .jacobian import JlogReport, det_dpsi_check, fd_jlog, jlog_report, predicted_jlog
from .network import (ChainSpaces, Edge, Network, ValidationReport, chain_spaces,
                      enumerate_compatible_orientations, is_compatible, validate_network)
from .numtheory import (RationalPolynomial, min_poly_residual, quadratic_discriminant,
                        quadratic_field_params, star_energies)
from .planar import (ConjugateFunction, DualNetwork, PlanarEmbedding, SmithDiagram, build_dual,
                     conjugate, smith_diagram)
from .solver import (ConstraintSet, EnharmonicSolution, conductances_of, solve_all,
                     solve_enharmonic)
from .tiling import RectTiling, render_svg, retile_with_areas, tiling_to_network

__version__ = "0.1.0"
