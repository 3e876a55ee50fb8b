"""Numerical certification of detectability-lemma bounds for frustration-free chains.

The subpackages build local projector Hamiltonians (``hamiltonian``, ``models``),
apply them matrix-free (``tensorspace``), solve for ground spaces and gaps
(``spectra``), and check the detectability-lemma inequalities (``dlcore``), the
coarse-graining gap amplification (``coarsegrain``, ``chebyshev``) and the
single-qubit tightness instance (``tightness``).
"""
from .hamiltonian import FFHamiltonian, ProjectorTerm, decompose_layers, interaction_graph, projectorize
from .models import aklt_chain, build_model, commuting_chain, heisenberg_fm_chain, random_ff_chain
from .spectra import SpectralData, ground_space
from .tensorspace import LocalOperator, SiteLattice, embed_apply

__version__ = "0.1.0"

__all__ = [
    "FFHamiltonian",
    "LocalOperator",
    "ProjectorTerm",
    "SiteLattice",
    "SpectralData",
    "aklt_chain",
    "build_model",
    "commuting_chain",
    "decompose_layers",
    "embed_apply",
    "ground_space",
    "heisenberg_fm_chain",
    "interaction_graph",
    "projectorize",
    "random_ff_chain",
]
