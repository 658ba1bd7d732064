"""Observable fields of wave functions on periodic grids: extraction,
split-step evolution, identity verification and flow-line integration."""

__version__ = "0.1.0"

from .grid import (
    ComplexField,
    Grid,
    ScalarField,
    VectorField,
    divergence,
    gradient,
    integrate,
    laplacian,
    make_grid,
)
from .params import PhysicalParams
from .fields import FieldSet, KoenigDecomposition, extract_fields, koenig_decompose
from .states import (
    Gaussian,
    HOEigenstate,
    PlaneWave,
    Superposition,
    Vortex2D,
    analytic_fields,
    realize,
)
from .evolve import (
    BarrierPotential,
    EvolutionParams,
    FreePotential,
    HarmonicPotential,
    SampledPotential,
    Snapshot,
    Trajectory,
    apply_hamiltonian,
    evolve_record,
    step,
)

__all__ = [
    "__version__",
    "ComplexField",
    "Grid",
    "ScalarField",
    "VectorField",
    "divergence",
    "gradient",
    "integrate",
    "laplacian",
    "make_grid",
    "PhysicalParams",
    "FieldSet",
    "KoenigDecomposition",
    "extract_fields",
    "koenig_decompose",
    "Gaussian",
    "HOEigenstate",
    "PlaneWave",
    "Superposition",
    "Vortex2D",
    "analytic_fields",
    "realize",
    "BarrierPotential",
    "EvolutionParams",
    "FreePotential",
    "HarmonicPotential",
    "SampledPotential",
    "Snapshot",
    "Trajectory",
    "apply_hamiltonian",
    "evolve_record",
    "step",
]
