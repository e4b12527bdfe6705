"""Simulation and certification toolkit for publicly verifiable
measurement-only blind quantum computation on 2-colorable graph states."""

from .bounds import (
    arbiter_certificate,
    azuma_hoeffding_bound,
    client_certificate,
    cost_comparison,
    plan_parameters,
    serfling_bound,
)
from .graph import ColoredGraph, build_colored_graph, neighbors, standard_graph
from .protocol import AdversaryStrategy, ProtocolConfig, run_protocol
from .stabsim import DenseState, Ensemble, PauliString, StabilizerTableau, fidelity_oracle, prepare_graph_state, to_dense
from .witness import compute_Mj, fidelity_from_witness, run_verification, setting_for_color, witness_expectation

__version__ = "0.1.0"

__all__ = [
    "AdversaryStrategy",
    "ColoredGraph",
    "DenseState",
    "Ensemble",
    "PauliString",
    "ProtocolConfig",
    "StabilizerTableau",
    "arbiter_certificate",
    "azuma_hoeffding_bound",
    "build_colored_graph",
    "client_certificate",
    "compute_Mj",
    "cost_comparison",
    "fidelity_from_witness",
    "fidelity_oracle",
    "neighbors",
    "plan_parameters",
    "prepare_graph_state",
    "run_protocol",
    "run_verification",
    "serfling_bound",
    "setting_for_color",
    "standard_graph",
    "to_dense",
    "witness_expectation",
]
