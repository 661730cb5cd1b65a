"""Slice functions over the complex numbers, quaternions and octonions.

Exact (rational) and floating arithmetic in the Cayley-Dickson algebras, star
polynomials and semiregular quotients, zero location, reciprocals and the
sphere maps they induce, modulus extrema, and spherical Laurent analysis.
"""

from .cayley_dickson import (
    Element,
    SphereDecomposition,
    associator,
    commutator,
    is_imaginary_unit,
    sphere_decompose,
    splitting_basis,
)
from .errors import (
    AmbiguousConstantProduct,
    ParseError,
    ProbeInconclusive,
    SliceError,
)
from .expr import format_function, parse, parse_element, parse_function, serialize
from .modulus_analysis import (
    local_extremum_probe,
    non_open_witness,
    open_image_epsilon,
    sphere_extrema,
)
from .reciprocal import (
    associator_vanishes,
    constant_translation_points,
    phi,
    reciprocal_image,
    reciprocal_via_phi,
    star_reciprocal,
    t_f,
    t_f_inverse,
    t_f_special,
)
from .singularities import (
    classify_singularity,
    density_probe,
    semiregular_mul,
    semiregular_reciprocal,
    sigma,
    spherical_laurent_extract,
    spherical_laurent_reconstruct,
    tau,
    u_dist,
)
from .slice_rep import (
    DomainSpec,
    SliceFunction,
    StemGrid,
    evaluate,
    is_slice_preserving,
    normal,
    slice_conjugate,
    slice_product,
    spherical_derivative,
    spherical_value,
    split_components,
)
from .star_poly import (
    SemiregularForm,
    StarLaurent,
    StarPolynomial,
    delta_poly,
    laurent_evaluate,
    star_power,
)
from .zeros import camshaft_zero, classify_sphere_zeros, normal_zero_on_sphere, zero_scan

__version__ = "0.1.0"
