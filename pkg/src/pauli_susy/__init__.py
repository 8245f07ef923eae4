"""Extended supersymmetry of the Pauli Hamiltonian on a symmetric lattice.

Typical use::

    from pauli_susy import Grid, builtin, certify, analyze_spectrum

    field = builtin("octopole").spec
    cert = certify(field, Grid.cubic(7))
    cert.n_supercharges            # 4
    analyze_spectrum(cert.supercharges.hamiltonian, cert.n_supercharges).law_satisfied
"""

from .catalog import NamedField, builtin
from .fielddsl import (
    Parity,
    Sampler,
    VectorPotentialSpec,
    evaluate,
    parity_of_component,
    parse,
    predict_supercharges,
    to_string,
)
from .lattice import Grid, LatticeOperator, momentum_op, multiplication_op, pauli, symmetry_op
from .spectral import analyze_spectrum, check_degeneracy_law, cluster_degeneracies, eigen_spectrum
from .susy import (
    admissibility,
    assemble_supercharges,
    build_hamiltonian,
    build_q0,
    certify,
    enumerate_candidates,
    max_compatible_set,
    pauli_consistency_check,
    verify_superalgebra,
)

__version__ = "0.1.0"
