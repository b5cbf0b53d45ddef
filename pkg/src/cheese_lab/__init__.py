"""Swiss-cheese constructions, boundary-measure checks and finite root extensions."""

from .builder import CheesePlan, build_plan, verify_budgets
from .config import RunConfig, load_config
from .geometry import Disc, boundary_arcs, winding_number
from .measures import annihilation_test, separation_test, separation_value, total_variation

__all__ = ["CheesePlan", "Disc", "RunConfig", "annihilation_test", "boundary_arcs", "build_plan",
           "load_config", "separation_test", "separation_value", "total_variation", "verify_budgets",
           "winding_number"]
