"""CSV persistence for policies, value functions, Q-tables, models, traces and benchmarks."""

import csv
from pathlib import Path

import numpy as np
import pandas as pd

from evoctrl.domain.errors import DomainError, PolicyParseError
from evoctrl.domain.evaluation import BenchmarkReport, FigureData
from evoctrl.domain.policies import ConstantPolicy, PolicySpec, ReciprocalPolicy, TablePolicy, policy_label
from evoctrl.domain.probability import ProblemSpec, TransitionModel
from evoctrl.domain.qlearning import QTable
from evoctrl.domain.simulator import EpisodeTrace
from evoctrl.domain.solver import ValueFunction

# 17 significant digits round-trip every float64
FLOAT_FORMAT = "%.17g"
POLICY_HEADER = "# policy: "


def _write_frame(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _read_frame(path: Path, columns: list[str]) -> pd.DataFrame:
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != columns:
        raise DomainError(f"{path}: expected columns {','.join(columns)}, found {','.join(map(str, frame.columns))}")
    return frame


def save_policy(policy: PolicySpec, path: Path) -> None:
    """Write a policy file.

    Constant and reciprocal policies are a single header line; table policies add a
    `state,theta` body with one row per non-terminal state.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"{POLICY_HEADER}{policy_label(policy)}\n")
        if isinstance(policy, TablePolicy):
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["state", "theta"])
            for s, theta in enumerate(policy.thetas):
                writer.writerow([s, repr(theta)])


def _parse_theta(raw: str, path: Path, line: int) -> float:
    try:
        theta = float(raw)
    except ValueError:
        raise PolicyParseError(str(path), line, f"invalid theta '{raw}'") from None
    if not 0 < theta <= 1:
        raise PolicyParseError(str(path), line, f"theta {theta} outside (0, 1]")
    return theta


def _parse_table(rows: list[tuple[int, list[str]]], path: Path, header_line: int) -> list[float]:
    thetas: list[float] = []
    for line, row in rows:
        if len(row) != 2:
            raise PolicyParseError(str(path), line, f"expected 'state,theta', found {len(row)} fields")
        try:
            state = int(row[0])
        except ValueError:
            raise PolicyParseError(str(path), line, f"invalid state '{row[0]}'") from None
        if state != len(thetas):
            raise PolicyParseError(str(path), line, f"expected state {len(thetas)}, found {state}")
        thetas.append(_parse_theta(row[1], path, line))

    if not thetas:
        raise PolicyParseError(str(path), header_line + 1, "table policy has no states")
    return thetas


def load_policy(path: Path, n: int | None = None) -> PolicySpec:
    """Read a policy file written by save_policy.

    Args:
        path: Policy CSV.
        n: Expected problem size; table policies must then cover states 0..n-1.

    Returns:
        The policy.

    Raises:
        PolicyParseError: On a malformed header or row, a theta outside (0, 1],
            states out of order or missing states. The error names the line.
        OSError: If the file cannot be read.
    """
    with open(path, newline="") as f:
        numbered = [(i, text.rstrip("\r\n")) for i, text in enumerate(f, start=1)]
    content = [(i, text) for i, text in numbered if text.strip()]

    if not content or not content[0][1].startswith(POLICY_HEADER):
        raise PolicyParseError(str(path), 1, f"missing '{POLICY_HEADER.strip()} <kind>' header")
    header_line, header = content[0]
    kind = header[len(POLICY_HEADER) :].strip()
    body = content[1:]

    if kind == "table":
        if not body or body[0][1].replace(" ", "") != "state,theta":
            raise PolicyParseError(str(path), header_line + 1, "expected 'state,theta' column header")
        table_header = body[0][0]
        rows = [(i, next(csv.reader([text]))) for i, text in body[1:]]
        thetas = _parse_table(rows, path, table_header)
        if n is not None and len(thetas) != n:
            last = rows[-1][0] if rows else table_header
            if len(thetas) < n:
                raise PolicyParseError(str(path), last + 1, f"missing states {len(thetas)}..{n - 1}")
            raise PolicyParseError(str(path), last, f"table covers {len(thetas)} states, expected {n}")
        return TablePolicy(tuple(thetas))

    if body:
        raise PolicyParseError(str(path), body[0][0], f"unexpected content after '{kind}' header")
    if kind == "reciprocal":
        return ReciprocalPolicy()
    if kind.startswith("constant:"):
        return ConstantPolicy(_parse_theta(kind.removeprefix("constant:"), path, header_line))
    raise PolicyParseError(str(path), header_line, f"unknown policy kind '{kind}'")


def save_values(values: ValueFunction, path: Path) -> None:
    """Write a value function as `state,value`."""
    frame = pd.DataFrame({"state": np.arange(values.n + 1), "value": values.values})
    _write_frame(frame, path)


def load_values(path: Path) -> ValueFunction:
    frame = _read_frame(path, ["state", "value"])
    if list(frame["state"]) != list(range(len(frame))):
        raise DomainError(f"{path}: states must run 0..n in order")
    return ValueFunction(frame["value"].to_numpy(dtype=np.float64))


def save_qtable(table: QTable, path: Path) -> None:
    """Write every cell of a Q-table as `state,theta,q`, terminal row included."""
    spec = table.spec
    states = np.repeat(np.arange(spec.n + 1), spec.n_actions)
    thetas = np.tile(np.asarray(spec.actions), spec.n + 1)
    frame = pd.DataFrame({"state": states, "theta": thetas, "q": table.q.ravel()})
    _write_frame(frame, path)


def load_qtable(path: Path) -> QTable:
    """Read a Q-table written by save_qtable.

    The action grid is rebuilt from the theta column. The loaded table has no
    visit counts.
    """
    frame = _read_frame(path, ["state", "theta", "q"])
    first_state = frame[frame["state"] == 0]
    actions = tuple(float(theta) for theta in first_state["theta"])
    n = int(frame["state"].max())

    spec = ProblemSpec(n, actions)
    if len(frame) != (n + 1) * spec.n_actions:
        raise DomainError(f"{path}: expected {(n + 1) * spec.n_actions} rows, found {len(frame)}")

    q = frame["q"].to_numpy(dtype=np.float64).reshape(n + 1, spec.n_actions).copy()
    return QTable(spec, q, visits=None)


def save_transition_model(model: TransitionModel, path: Path) -> None:
    """Write the nonzero entries of a model as `s,theta,s_prime,prob`."""
    parts = []
    for s, block in enumerate(model.blocks):
        action, offset = np.nonzero(block)
        parts.append(
            pd.DataFrame(
                {
                    "s": s,
                    "theta": np.asarray(model.spec.actions)[action],
                    "s_prime": s + offset,
                    "prob": block[action, offset],
                }
            )
        )
    _write_frame(pd.concat(parts, ignore_index=True), path)


def save_trace(trace: EpisodeTrace, path: Path) -> None:
    """Write an episode as `t,s,theta,s_prime`, one row per iteration."""
    frame = pd.DataFrame(
        [(t, s, theta, s_next) for t, (s, theta, s_next) in enumerate(trace.transitions)],
        columns=["t", "s", "theta", "s_prime"],
    )
    _write_frame(frame, path)


def benchmark_frame(report: BenchmarkReport) -> pd.DataFrame:
    return pd.DataFrame(
        [(e.name, str(e.start), e.runs, e.mean, e.std, e.truncated) for e in report.entries],
        columns=["policy", "start", "runs", "mean", "std", "truncated"],
    )


def by_start_frame(report: BenchmarkReport) -> pd.DataFrame:
    rows = [
        (entry.name, s, group.runs, group.mean, group.std)
        for entry in report.entries
        for s, group in entry.by_start().items()
    ]
    return pd.DataFrame(rows, columns=["policy", "start_state", "runs", "mean", "std"])


def save_benchmark(report: BenchmarkReport, path: Path, by_start_path: Path | None = None) -> None:
    """Write `policy,start,runs,mean,std,truncated`, and optionally the per-start breakdown."""
    _write_frame(benchmark_frame(report), path)
    if by_start_path is not None:
        _write_frame(by_start_frame(report), by_start_path)


def figure_paths(prefix: Path) -> tuple[Path, Path, Path]:
    """Paths of the values, policies and marks files for a prefix."""
    return (
        prefix.with_name(f"{prefix.name}_values.csv"),
        prefix.with_name(f"{prefix.name}_policies.csv"),
        prefix.with_name(f"{prefix.name}_marks.csv"),
    )


def export_figure_data(data: FigureData, prefix: Path) -> tuple[Path, Path, Path]:
    """Write the value curves, policy curves and Monte Carlo marks.

    Returns:
        The three written paths.
    """
    values_path, policies_path, marks_path = figure_paths(prefix)

    values = pd.DataFrame(
        [(s, name, float(v)) for name, vf in data.values.items() for s, v in enumerate(vf.values)],
        columns=["state", "policy", "value"],
    )
    policies = pd.DataFrame(
        [(s, name, float(theta)) for name, thetas in data.thetas.items() for s, theta in enumerate(thetas)],
        columns=["state", "policy", "theta"],
    )
    marks = pd.DataFrame(
        [(m.state, m.policy, m.runs, m.mean, m.std, m.exact_value) for m in data.marks],
        columns=["state", "policy", "runs", "mean", "std", "exact_value"],
    )

    _write_frame(values, values_path)
    _write_frame(policies, policies_path)
    _write_frame(marks, marks_path)
    return values_path, policies_path, marks_path
