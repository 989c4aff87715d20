"""Isotropic Gaussian random sections of spin and tensor bundles on the sphere and ball."""

from .errors import (BandLimitExceeded, CovarianceInvalid, FileFormatError, GroupPairUnsupported,
                     InvalidArgument, InvalidLabel, RankDeficient, SpectrumInvalid, SpinBundleError)
from .harmonics import real_ylm, spin_ylm, spin_ylm_all, wigner_d
from .io import SCHEMA_VERSION
from .ladder import apply_chain, distortion_fields, distortion_multipliers, eth_lower, eth_raise
from .radial import (RadialCovariance, RadialFrame, RadialGrid, bessel_zero_kgrid, build_frame,
                     expand_in_basis, fourier_bessel_forward, fourier_bessel_inverse,
                     lensing_potential, make_radial_grid, sample_ball_field, spherical_jn)
from .randomfield import (PowerSpectrumSet, eb_to_qu, estimate_power_spectrum, qu_to_eb,
                          sample_coefficients, sample_scalar_field, sample_stokes_bundle)
from .reptheory import (decompose, division_algebra_type, induced_multiplicity, parse_label,
                        restrict_o3_to_o2, tensor_o2)
from .transform import HarmonicCoefficients, SphereGrid, SphereMap, analyze, make_grid, synthesize

__version__ = "0.1.0"
