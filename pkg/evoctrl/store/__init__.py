"""File store layer - CSV persistence for every artifact evoctrl reads or writes.

This module re-exports all public file functions for easy importing.
"""

from evoctrl.store.files import (
    benchmark_frame,
    by_start_frame,
    export_figure_data,
    figure_paths,
    load_policy,
    load_qtable,
    load_values,
    save_benchmark,
    save_policy,
    save_qtable,
    save_trace,
    save_transition_model,
    save_values,
)

__all__ = [
    "benchmark_frame",
    "by_start_frame",
    "export_figure_data",
    "figure_paths",
    "load_policy",
    "load_qtable",
    "load_values",
    "save_benchmark",
    "save_policy",
    "save_qtable",
    "save_trace",
    "save_transition_model",
    "save_values",
]
