"""Interaction-frame Hamiltonian simulation: dense-matrix reference implementations
of product formulas, continuous qDRIFT, qubitization and their hybrids."""
from . import channels, constraints, evolvers, hybrid, linops, models, qubitization, resources
from .channels import Channel, diamond_bracket
from .evolvers import CostLedger, exact_evolution, trotter_product
from .hybrid import (HybridResult, qdrift_qubitization_ip, trotter_qdrift_ip,
                     trotter_qdrift_qubitization_ip)
from .linops import TimeDependentHam, expm_hermitian, schatten_norm
from .models import (LcuDecomposition, NeutrinoParams, SchwingerParams, SumHamiltonian,
                     build_neutrino, build_schwinger)

__version__ = "0.1.0"
