from reward_profiling.harness.config import ExperimentConfig, build_experiment_config
from reward_profiling.harness.metrics import rounds_to_fraction, summarize, variability_reduction
from reward_profiling.harness.results import read_rounds, report, write_results
from reward_profiling.harness.runner import run_experiment
