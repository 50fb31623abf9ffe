"""RSSI fingerprinting localization for low-power wide-area networks."""

from ._core import (
    DEFAULT_D2D_THRESHOLD_DBM,
    EARTH_RADIUS_M,
    MISSING_FILL_DBM,
    SPEED_OF_LIGHT,
    Anchor,
    CampaignConfig,
    ChannelModel,
    ClassPartition,
    GeoPoint,
    LocalizationResult,
    PlanarPoint,
    RangingCurve,
    TrainedClassifier,
    assign_class,
    crlb_rssi,
    crlb_toa,
    derive_seed,
    distance,
    error_cdf,
    fit_polynomial,
    fit_power,
    invert_distance,
    localize,
    make_partition,
    multilaterate,
    project,
    rbf_kernel,
    rssi_mean,
    run_sweep,
    train,
    unproject,
)

__all__ = [
    "DEFAULT_D2D_THRESHOLD_DBM",
    "EARTH_RADIUS_M",
    "MISSING_FILL_DBM",
    "SPEED_OF_LIGHT",
    "Anchor",
    "CampaignConfig",
    "ChannelModel",
    "ClassPartition",
    "GeoPoint",
    "LocalizationResult",
    "PlanarPoint",
    "RangingCurve",
    "TrainedClassifier",
    "assign_class",
    "crlb_rssi",
    "crlb_toa",
    "derive_seed",
    "distance",
    "error_cdf",
    "fit_polynomial",
    "fit_power",
    "invert_distance",
    "localize",
    "make_partition",
    "multilaterate",
    "project",
    "rbf_kernel",
    "rssi_mean",
    "run_sweep",
    "train",
    "unproject",
]

__version__ = "0.1.0"
