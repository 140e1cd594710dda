# Copyright svtk contributors
# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the svtk C++ core."""

from ._core import (
    Contour,
    DataError,
    DomainError,
    Error,
    FormatError,
    content_loss,
    dtw,
    emg_preprocess,
    error_rate,
    flatten,
    frame_f0_loss,
    global_pitch,
    global_pitch_loss,
    lead_shift,
    local_f0_deviation,
    read_contour,
    read_features,
    read_wav,
    speaker_consistency,
    synthesize,
    track_pitch,
    write_contour,
    write_features,
    write_wav,
)

__version__ = "0.1.0"

__all__ = [
    "Contour",
    "DataError",
    "DomainError",
    "Error",
    "FormatError",
    "content_loss",
    "dtw",
    "emg_preprocess",
    "error_rate",
    "flatten",
    "frame_f0_loss",
    "global_pitch",
    "global_pitch_loss",
    "lead_shift",
    "local_f0_deviation",
    "read_contour",
    "read_features",
    "read_wav",
    "speaker_consistency",
    "synthesize",
    "track_pitch",
    "write_contour",
    "write_features",
    "write_wav",
]
