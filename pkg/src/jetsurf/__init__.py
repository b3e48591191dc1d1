"""Numerics for degree-n higher complex structures on the Bolza surface.

Layers:
  * jets / chart      pointwise truncated jet algebra, disk charts
  * surface           discrete Bolza surface, tensor calculus, bases
  * hodge             Hodge splitting of k-Beltrami differentials
  * flows             first variation, Hamiltonian flows, decompositions
  * harmonize         canonical harmonic orbit representatives
  * affine            degree-3 holonomy via affine spheres
  * modeljet          exact rational nilpotent jet group
"""

from .chart import ChartMap, DiskChart
from .flows import (FlowAborted, FlowRecord, HamiltonianJet,
                    decompose_inductive, exponential_hamiltonian,
                    first_variation, first_variation_maass, flow_endpoint,
                    flow_integrate, homogeneous_real, pullback_beltrami,
                    recompose)
from .group import FuchsianGroup
from .harmonize import (energy, harmonic_representative,
                        harmonicity_residual, orbit_perturb)
from .hodge import (HodgeSplit, get_solver, harmonic_projection,
                    hodge_decompose, pressure_restriction_pairing,
                    solve_dbar_potential)
from .jets import (NEGATIVE, POSITIVE, HigherStructure, JetField, JetPoly,
                   act_by_chart_diffeo, ideal_reduce, jet_conj,
                   jet_field_mul, jet_mul, jet_poisson, project_structure)
from .mesh import SurfaceMesh
from .modeljet import (ModelJet, mj_central_series, mj_compose, mj_exp,
                       mj_invert, mj_log)
from .surface import BolzaSurface, SpectralGapError, TensorField
from .affine import (BlaschkeMetric, Holonomy, PickData, develop_frame,
                     hitchin_map, holonomy, pick_differential, wang_solve)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
