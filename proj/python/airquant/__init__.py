"""Airway quantification: phantoms, segmentation, metrics and statistics."""

from airquant._core import (  # noqa: F401
    AirquantConfigError,
    AirquantDegenerateError,
    AirquantGeometryError,
    AirquantIoError,
    EdtResult,
    Mask,
    PhantomOutput,
    TestResult,
    VoxelGrid,
    binarize,
    boundary_weights,
    bsa_dubois,
    build_phantom,
    centerline_recall,
    clip_normalize,
    dice,
    edt,
    find_trachea_seed,
    fisher_exact_2x2,
    grid_from_numpy,
    hybrid_loss,
    mask_from_numpy,
    mask_volume_mm3,
    normalize_by_bsa,
    read_nifti,
    region_grow_airway,
    resample_trilinear,
    segment_lung_coarse,
    shapiro_wilk,
    t_test_raw,
    t_test_summary,
    write_nifti,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = getattr(__import__("airquant._core", fromlist=["__version__"]),
                      "__version__", "dev")
