from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (run_conservation_study, run_convergence_study, run_evolve,
                          run_experiment, run_groundstate, run_ssfm_ref, run_stability_map,
                          run_timing)
from .snapshot import SnapshotFormatError, read_snapshot, write_snapshot
