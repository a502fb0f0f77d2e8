"""Flow-graph linear program for the TSP: model building, solving, tour
extraction and verification against exact oracles."""

from .errors import (
    ConfigError,
    DomainError,
    GenerationError,
    ParseError,
    TspLpError,
    ValidationError,
)
from .extract import (
    Decomposition,
    enumerate_tsp_paths,
    find_tsp_path,
    iterative_elimination,
)
from .instance import GenConfig, TspInstance, generate_random, load_csv, save_csv, tour_cost
from .lpio import read_solution, write_model
from .model import (
    BuildOptions,
    FeasibilityReport,
    LinearModel,
    blend_points,
    build_model,
    check_point,
    tour_to_point,
)
from .oracle import brute_force_opt, held_karp_opt, write_mtz
from .solver import Solution, SolverSettings, solve
from .tspfg import VariableIndex, build_index, is_implicit_zero_x

__version__ = "0.1.0"
