"""Link-level toolkit for constellation-partitioned multiple access.

Several users share one OFDM resource block by each owning a disjoint slice
of a single QAM constellation: a label's address bits say whose symbol it
is, the rest carry that user's data. The package builds the constellations
and allocation plans, frames data into resource blocks, runs the
OFDM/AWGN chain, and checks measured error rates against closed forms.
"""

__version__ = "0.1.0"

from .analytics import (
    FORMULA_IDS,
    TheoryCurve,
    ber_gray_approx,
    q_function,
    ser_data_width,
    ser_mqam,
    ser_shared,
    theory_curve,
)
from .channel import SNR_MODES, SnrSpec, add_awgn, resolve_symbol_snr
from .config import ConfigError, LoadedConfig, load_config, parse_config
from .constellation import (
    SUPPORTED_ORDERS,
    Constellation,
    MinDistanceReport,
    build_qam,
    gray_decode,
    gray_encode,
    min_distance,
    nearest_point,
    nearest_points,
)
from .framing import (
    RbGeometry,
    SlotSchedule,
    frame_user_data,
    round_robin_schedule,
    weighted_schedule,
)
from .mapping import (
    AddressBitLayout,
    AllocationPlan,
    UserAllocation,
    build_address_bit_plan,
    build_lookup_plan,
    build_qos_plan,
    capacity_enhancement,
    centered_address_positions,
    demap_symbol,
    format_lookup_table,
    lookup_plan_from_file,
    map_symbol,
    parse_lookup_table,
    single_user_plan,
    throughput_reduction,
)
from .ofdm import TimeDomainSignal, ofdm_demodulate, ofdm_demodulate_bins, ofdm_modulate
from .report import (
    REPORT_COLUMNS,
    multi_report_csv,
    report_csv,
    summary_text,
    write_text_atomic,
)
from .simulate import (
    BerReport,
    ExperimentConfig,
    PlanSpec,
    ReportRow,
    ScheduleSpec,
    StopRule,
    SweepSpec,
    compare_user_scaling,
    run_experiment,
)

__all__ = [
    "__version__",
    "FORMULA_IDS",
    "TheoryCurve",
    "ber_gray_approx",
    "q_function",
    "ser_data_width",
    "ser_mqam",
    "ser_shared",
    "theory_curve",
    "SNR_MODES",
    "SnrSpec",
    "add_awgn",
    "resolve_symbol_snr",
    "ConfigError",
    "LoadedConfig",
    "load_config",
    "parse_config",
    "SUPPORTED_ORDERS",
    "Constellation",
    "MinDistanceReport",
    "build_qam",
    "gray_decode",
    "gray_encode",
    "min_distance",
    "nearest_point",
    "nearest_points",
    "RbGeometry",
    "SlotSchedule",
    "frame_user_data",
    "round_robin_schedule",
    "weighted_schedule",
    "AddressBitLayout",
    "AllocationPlan",
    "UserAllocation",
    "build_address_bit_plan",
    "build_lookup_plan",
    "build_qos_plan",
    "capacity_enhancement",
    "centered_address_positions",
    "demap_symbol",
    "format_lookup_table",
    "lookup_plan_from_file",
    "map_symbol",
    "parse_lookup_table",
    "single_user_plan",
    "throughput_reduction",
    "TimeDomainSignal",
    "ofdm_demodulate",
    "ofdm_demodulate_bins",
    "ofdm_modulate",
    "REPORT_COLUMNS",
    "multi_report_csv",
    "report_csv",
    "summary_text",
    "write_text_atomic",
    "BerReport",
    "ExperimentConfig",
    "PlanSpec",
    "ReportRow",
    "ScheduleSpec",
    "StopRule",
    "SweepSpec",
    "compare_user_scaling",
    "run_experiment",
]
