"""Phase detection in temporal networks with continuous-time random walks."""
from .errors import DatasetError, NumericalError, PhaseWalkError, ValidationError
from .network import (SnapshotGraph, TemporalNetwork, aggregate_window, connected_components, degree_vector,
                      load_temporal_network, save_temporal_network)
from .pipeline import PhaseResult, RunConfig, run_imc, run_lne

__version__ = "0.1.0"
