"""Single-aperture radio positioning from the spherical wavefront.

Infers a transmitter's position from the curvature of the wavefront
observed by one receiving aperture, for three receiver architectures
(reconfigurable lens, fixed lens with a focal-arc array, bare planar
array), with matched-filter / energy-scan / differential estimators and
multi-source interference analysis.
"""

from .channel import LinkBudget, Snapshot, add_noise, amplitude, surface_field, trial_rng
from .config import ConfigError, ScenarioConfig
from .estimation import (
    Estimate,
    SearchGrid,
    TemplateBank,
    differential_estimate,
    ml_estimate,
    rlens_scan,
    template_bank,
)
from .frontends import (
    RLensProfile,
    SurfaceGrid,
    nolens_output,
    nrlens_output,
    rlens_output,
    rlens_profile,
)
from .geometry import (
    ARCH_NO_LENS,
    ARCH_NR_LENS,
    ARCH_R_LENS,
    ARCHITECTURES,
    ApertureSpec,
    ArrayLayout,
    ReceiverPose,
    SourcePosition,
    SurfacePoint,
    build_layout,
    extra_distance_exact,
    extra_distance_fresnel,
    fraunhofer_distance,
)
from .interference import (
    InterferenceScenario,
    PppModel,
    SirResult,
    ppp_coverage,
    rlens_envelope_bound,
    sir_exact,
    sir_nolens_fresnel,
    sir_rlens_sinc,
)

__version__ = "0.1.0"
