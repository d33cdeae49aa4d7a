from autohr.nas.cells import DiscreteCellModule, SearchCell, cell_forward
from autohr.nas.genotype import (
    EDGES,
    PRESETS,
    ArchParams,
    CellEdge,
    DiscreteCell,
    derive_architecture,
    genotype_from_text,
    genotype_to_text,
    preset,
)
from autohr.nas.ops import NUM_OPS, PRIMITIVES, MixedOp, mixed_edge_forward
