"""One-dimensional virtual coordinates from hop-count rings and neighbour censuses."""

from .collisions import (CollisionReport, coordinate_space_size, count_collisions,
                         expected_collisions)
from .geometry import (AreaFractions, OffsetTable, RingModelParams, area_fractions, area_inner,
                       area_outer, build_offset_table)
from .mapper import MappingResult, NeighborCensus, TableSet, assign_coordinate, census_fractions
from .sim import (PropagationConfig, ProtocolConfig, SimOutcome, Topology, build_links,
                  compute_all_coordinates, place_nodes, run_initialization)

__version__ = "0.1.0"
