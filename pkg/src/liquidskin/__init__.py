"""Digital twin of a random-network liquid-conductor tactile sensing skin.

The package simulates the two-electrode complex impedance of a Delaunay
channel network under timed presses, classifies responses into four
geometric families, localizes presses from impedance traces, and realizes
threshold Boolean logic from two-input press protocols.
"""

from .circuit import (
    AdmittanceSystem,
    ComplexZ,
    EdgeElement,
    MaterialParams,
    channel_element,
    dc_iv,
    impedance,
    log_sweep_frequencies,
    sweep,
)
from .errors import (
    CalibrationInfeasibleError,
    DegenerateInputError,
    DomainError,
    InfeasiblePackingError,
    InsufficientBaselineError,
    InsufficientDataError,
    LiquidSkinError,
    ProtocolWindowError,
    SchemaError,
    SingularSystemError,
    UnclassifiableEventError,
)
from .files import (
    default_network,
    load_coeffs,
    load_gate_asset,
    load_material,
    load_network,
    load_scenario,
    paper_levels_asset,
    save_coeffs,
    save_gate_asset,
    save_material,
    save_network,
    save_scenario,
)
from .geometry import (
    CellId,
    Network,
    Point2,
    Triangulation,
    cell_of_point,
    cell_rectangle,
    delaunay,
    edges_under_cell,
    generate_random_points,
)
from .localization import (
    Event,
    LocalizationResult,
    TouchLocalizer,
    classify_signature,
    detect_events,
    localize,
    signature_table,
)
from .logic import (
    GateOutputs,
    MultitouchConfig,
    TruthTable,
    calibrate,
    realizable_gates,
    run_multitouch,
    threshold_gate,
)
from .stimulus import (
    DisturbanceSettings,
    Family,
    PerturbCoeffs,
    Press,
    Scenario,
    TimeSeries,
    classify_cell_family,
    family_map,
    perturb,
    press_signature,
    simulate_scenario,
    subtract_drift,
)

__version__ = "1.0.0"
