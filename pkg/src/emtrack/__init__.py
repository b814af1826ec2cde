"""Electromagnetic tracking: acquisition, demodulation, field model, pose solver, OpenIGTLink."""
from .acquisition import AcquisitionConfig, SampleFrame, SimulatedSource, TrajectorySpec, frame_stream, synth_frame
from .config import PipelineConfig, load_config
from .fieldmodel import (
    CoilSpec,
    FieldVector,
    SensorSpec,
    TransmitterArray,
    biot_savart_field,
    default_array,
    dipole_field,
    forward_model,
    sensor_normal,
)
from .filter import DemodulationMatrix, SpectralMeasurement, build_demod, extract
from .igtlink import IGTLinkServer, TransformMessage, crc64, encode_transform, pose_to_matrix, serve
from .pose import Pose5DOF, canonicalize
from .solver import Bounds, SolveResult, SolverSession, SolverSettings, jacobian, levenberg_marquardt, residuals, solve_pose

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "Bounds",
    "CoilSpec",
    "DemodulationMatrix",
    "FieldVector",
    "IGTLinkServer",
    "PipelineConfig",
    "Pose5DOF",
    "SampleFrame",
    "SensorSpec",
    "SimulatedSource",
    "SolveResult",
    "SolverSession",
    "SolverSettings",
    "SpectralMeasurement",
    "TrajectorySpec",
    "TransformMessage",
    "TransmitterArray",
    "biot_savart_field",
    "build_demod",
    "canonicalize",
    "crc64",
    "default_array",
    "dipole_field",
    "encode_transform",
    "extract",
    "forward_model",
    "frame_stream",
    "jacobian",
    "levenberg_marquardt",
    "load_config",
    "pose_to_matrix",
    "residuals",
    "sensor_normal",
    "serve",
    "solve_pose",
    "synth_frame",
    "__version__",
]
