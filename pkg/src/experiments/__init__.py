from .output import PipelineResult, format_value, read_rows, write_csv, write_result
from .pipelines import SUBCOMMANDS, ExperimentRunner, RunOptions, fan_out, run_pipeline
from .schema import ExperimentConfig, load_config, validate_config

__all__ = [
    'ExperimentConfig',
    'ExperimentRunner',
    'PipelineResult',
    'RunOptions',
    'SUBCOMMANDS',
    'fan_out',
    'format_value',
    'load_config',
    'read_rows',
    'run_pipeline',
    'validate_config',
    'write_csv',
    'write_result',
]
