"""fracdim: box dimension and Assouad spectrum of concentric fractal
collections, polynomial spirals and spiral shells, plus the quasiconformal
classification of shells."""

from .covering import (
    CoverResult,
    brute_force_covering,
    covering_number,
    covering_profile,
    local_covering_number,
)
from .dimension import (
    ImpossibilityWindow,
    RegressionFit,
    SpectrumCurve,
    closed_form_spectrum_curve,
    detect_phase_transition,
    estimate_assouad_spectrum_point,
    estimate_box_dimension,
    estimate_spectrum_curve,
    formula_assouad_spectrum,
    formula_box_dim,
    formula_spectrum_upper_bound,
    impossibility_window,
    phase_transition_theta,
    regularize,
)
from .geometry import (
    CollectionSpec,
    SampleSet,
    ShellSpec,
    generate,
    generate_concentric_spheres,
    generate_shell,
    generate_snowflake,
    generate_spiral,
    hausdorff_distance,
    radial_stretch,
    set_distance,
    verify_concentric_conditions,
)
from .qc import (
    Classification,
    DistortionParams,
    ShellPair,
    classify,
    distortion_bounds,
    map_shell_sample,
    min_dilatation,
    spectrum_equivalence_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
