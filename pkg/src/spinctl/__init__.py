"""spinctl: rf/microwave control toolkit for alkali hyperfine spin manifolds.

The package covers the full loop for a ground-state hyperfine spin:

- :mod:`spinctl.spin_algebra` — direct-sum basis, angular-momentum and
  irreducible-tensor operators, microwave transition bookkeeping;
- :mod:`spinctl.hamiltonians` — rotating-frame control Hamiltonians for rf
  and microwave channels;
- :mod:`spinctl.controllability` — Lie-closure rank tests and configuration
  scans;
- :mod:`spinctl.waveform` — slew-limited knot parameterization, splines,
  feasibility projection, delimited waveform files;
- :mod:`spinctl.simulator` — piecewise-constant Schrödinger propagation;
- :mod:`spinctl.optimizer` — exact-gradient ascent for state preparation,
  multi-seed searches, and benchmark sweeps;
- :mod:`spinctl.wigner` — generalized four-sphere phase-space fields;
- :mod:`spinctl.configfile`, :mod:`spinctl.records`, :mod:`spinctl.cli` —
  YAML configs, reproducible run records, and the ``spinctl`` command.

Internal units are rad/µs for angular frequencies and µs for times.
"""

__version__ = "0.1.0"

from .spin_algebra import (  # noqa: E402
    MicrowaveTransition,
    SpinSystem,
    angular_momentum,
    coupled_tensor,
    spherical_tensor,
)
from .hamiltonians import (  # noqa: E402
    ChannelSpec,
    ControlConfiguration,
    static_hamiltonian,
    total_hamiltonian,
)
from .controllability import (  # noqa: E402
    LieClosureResult,
    is_controllable,
    lie_closure,
    scan_configurations,
)
from .waveform import (  # noqa: E402
    ChannelKnots,
    SampledControls,
    WaveformKnots,
    interpolate,
    random_knots,
    read_knots_csv,
    validate,
    write_knots_csv,
)
from .simulator import Trajectory, fidelity, propagate  # noqa: E402
from .optimizer import (  # noqa: E402
    OptimizationResult,
    OptimizerSettings,
    StatePrepProblem,
    ascend,
    benchmark,
    haar_random_state,
    multi_seed_search,
)
from .wigner import (  # noqa: E402
    SphereRadii,
    WignerSphereGrid,
    coherence_coefficients,
    export_grid,
    sphere_grid,
    sphere_radii,
)
from .presets import (  # noqa: E402
    PRESETS,
    cesium_baseline,
    cesium_two_microwave,
    two_level_toy,
)
from .configfile import ConfigBundle, ConfigError, load_config, resolve_config  # noqa: E402

__all__ = [
    "__version__",
    "MicrowaveTransition",
    "SpinSystem",
    "angular_momentum",
    "coupled_tensor",
    "spherical_tensor",
    "ChannelSpec",
    "ControlConfiguration",
    "static_hamiltonian",
    "total_hamiltonian",
    "LieClosureResult",
    "is_controllable",
    "lie_closure",
    "scan_configurations",
    "ChannelKnots",
    "SampledControls",
    "WaveformKnots",
    "interpolate",
    "random_knots",
    "read_knots_csv",
    "validate",
    "write_knots_csv",
    "Trajectory",
    "fidelity",
    "propagate",
    "OptimizationResult",
    "OptimizerSettings",
    "StatePrepProblem",
    "ascend",
    "benchmark",
    "haar_random_state",
    "multi_seed_search",
    "SphereRadii",
    "WignerSphereGrid",
    "coherence_coefficients",
    "export_grid",
    "sphere_grid",
    "sphere_radii",
    "PRESETS",
    "cesium_baseline",
    "cesium_two_microwave",
    "two_level_toy",
    "ConfigBundle",
    "ConfigError",
    "load_config",
    "resolve_config",
]
