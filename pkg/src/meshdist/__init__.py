"""Lexicographic and space-filling-curve distribution of structured meshes."""
from .brick import (BrickLayout, Partition, Quadrant, brick_params, global_sfc_index,
                    morton_decode, morton_encode, owner_of_quadrant, quad_to_pvec,
                    uniform_partition)
from .errors import ConfigurationError, ConsistencyError, InvalidParameterError, MeshDistError
from .exchange import (Envelope, Message, RankState, build_envelope, dependent_region, exchange,
                       local_boundary_fill, make_states)
from .grid import (AxisSplit, Box, GridConfig, Locality, Subgrid, check_cover, derive_parts,
                   make_subgrid, split_counts, subgrid_corner, subgrid_extent)
from .harness import (Metrics, SimulationConfig, measure_metrics, run_simulation, scaling_sweep,
                      serial_oracle)
from .lex import (LexLayout, build_lex_layout, build_lex_layouts, lex_dependent_region,
                  lex_neighbor, lex_owner)
from .sfc import SfcLayout, build_sfc_layout, build_sfc_layouts, compute_ghost
from .stencil import Connectivity, Stencil, connectivity_of, ghost_width

__version__ = "0.1.0"
