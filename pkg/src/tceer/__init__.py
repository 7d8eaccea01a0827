"""Trust- and congestion-aware energy-efficient routing for sensor networks."""
from .config import ConfigError, SimConfig, load_config
from .engine import RunResult, Simulation, run, run_baseline, trace_source

__all__ = ["ConfigError", "SimConfig", "load_config", "RunResult", "Simulation",
           "run", "run_baseline", "trace_source"]
__version__ = "0.1.0"
