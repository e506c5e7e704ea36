"""Drifting-grating characterisation of the motion detectors."""

from .grating import (NULL, PREFERRED, TABLE_CONTRASTS, TABLE_FREQUENCIES_HZ, GratingSpec,
                      grating_columns, michelson_contrast, synth_grating_events)
from .tuning import (CURVE_HEADER, REPS, RUN_HEADER, ContrastResponse, Response, RunRow,
                     TuningCurve, contrast_response, curve_table, curves_csv, ingest_rows,
                     population_response, run_grid, run_point, runs_csv, tuning_curves)

__all__ = [
    "NULL", "PREFERRED", "TABLE_CONTRASTS", "TABLE_FREQUENCIES_HZ", "GratingSpec",
    "grating_columns", "michelson_contrast", "synth_grating_events",
    "CURVE_HEADER", "REPS", "RUN_HEADER", "ContrastResponse", "Response", "RunRow",
    "TuningCurve", "contrast_response", "curve_table", "curves_csv", "ingest_rows",
    "population_response", "run_grid", "run_point", "runs_csv", "tuning_curves",
]
