"""latspec: exact integer-lattice dynamics at desk scale.

Subpackages cover lattice normal forms, haystack families of primitive
vectors, simplex volume spectra of finite point sets, finite and Kronecker
model systems with exact measures, spectral measures with their expansion
and intersection checks, and a config-driven CLI.
"""

from .haystack import Haystack, HaystackVerdict, make_haystack, verify_haystack_sample
from .lattice import (
    LatVec,
    QuotientStructure,
    SubLattice,
    complete_to_basis,
    contains,
    det_exact,
    hnf,
    is_primitive,
    scale_lattice,
    smallest_scale_inside,
    snf,
    sublattice,
)
from .spectral import (
    SpectralMeasure,
    annihilator_mass,
    directional_expansion_theorem_check,
    expansion_bound_check,
    intersection_theorem_search,
    normalized,
    rational_mass_excluding_trivial,
    shrink_rational_spectrum,
    small_intersection_bound,
    spectral_measure,
    spectral_measure_kronecker,
    verify_bochner,
)
from .systems import (
    BoxUnion,
    ErgodicComponent,
    ErgodicSetSpec,
    FiniteSystem,
    KroneckerSystem,
    birkhoff_annihilator_average,
    ergodic_components,
    finite_system,
    is_ergodic_direction,
    kronecker_system,
    max_directional_expansion,
    orbit_saturation,
)
from .volume import (
    PatternWitness,
    PointSet,
    SimplexRecord,
    ap_certificate,
    build_point_set,
    pattern_search,
    simplex_det,
    upper_density_estimate,
    volume_spectrum,
)

__version__ = "0.1.0"
