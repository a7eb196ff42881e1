"""Aggregation of run records into summary metrics.

Values are kept at full precision; rounding happens only in the display
helpers (percentages and seconds to 1 decimal, means to 2 decimals).
"""

import statistics
from dataclasses import dataclass

from .experiment import RunRecord


class StatsError(ValueError):
    pass


class EmptyInputError(StatsError):
    pass


class MixedConfigurationsError(StatsError):
    """Records with differing ea counts cannot share one summary column."""


def mean(values) -> float:
    values = list(values)
    if not values:
        raise EmptyInputError("mean of no values")
    return statistics.fmean(values)


def sample_std(values) -> float:
    """Standard deviation with the n-1 denominator; 0.0 for a single value."""
    values = list(values)
    if not values:
        raise EmptyInputError("sample_std of no values")
    if len(values) == 1:
        return 0.0
    return statistics.stdev(values)


@dataclass(frozen=True)
class AggregateStats:
    ea: int
    n_runs: int
    success_rate_pct: float
    avg_duration_s: float
    duration_std_s: float
    avg_steps: float
    avg_reformed: float
    reformed_std: float
    avg_malicious: float
    malicious_std: float


def aggregate(records: list[RunRecord]) -> AggregateStats:
    """One summary column over records that share an ea count."""
    if not records:
        raise EmptyInputError("no records to aggregate")
    eas = {r.ea for r in records}
    if len(eas) != 1:
        raise MixedConfigurationsError(f"records mix ea counts {sorted(eas)}")
    times = [r.time_s for r in records]
    reformed = [r.reformed for r in records]
    malicious = [r.malicious for r in records]
    return AggregateStats(
        ea=eas.pop(),
        n_runs=len(records),
        success_rate_pct=100.0 * sum(1 for r in records if r.result == "success") / len(records),
        avg_duration_s=mean(times),
        duration_std_s=sample_std(times),
        avg_steps=mean([r.steps for r in records]),
        avg_reformed=mean(reformed),
        reformed_std=sample_std(reformed),
        avg_malicious=mean(malicious),
        malicious_std=sample_std(malicious),
    )


# --- display -----------------------------------------------------------------

# (label, attribute, decimals); the layout of the printed summary table.
_TABLE_ROWS = (
    ("Success Rate (%)", "success_rate_pct", 1),
    ("Avg Duration (s)", "avg_duration_s", 1),
    ("Duration Std (s)", "duration_std_s", 1),
    ("Avg Steps", "avg_steps", 1),
    ("Avg Reformed", "avg_reformed", 2),
    ("Reformed Std", "reformed_std", 2),
    ("Avg Malicious", "avg_malicious", 2),
    ("Malicious Std", "malicious_std", 2),
)

SUMMARY_CSV_HEADER = (
    "label,ea,n_runs,success_rate_pct,avg_duration_s,duration_std_s,avg_steps,"
    "avg_reformed,reformed_std,avg_malicious,malicious_std"
)


def summary_csv_row(label: str, stats: AggregateStats) -> str:
    return (
        f"{label},{stats.ea},{stats.n_runs},{stats.success_rate_pct:.1f},"
        f"{stats.avg_duration_s:.1f},{stats.duration_std_s:.1f},{stats.avg_steps:.1f},"
        f"{stats.avg_reformed:.2f},{stats.reformed_std:.2f},"
        f"{stats.avg_malicious:.2f},{stats.malicious_std:.2f}"
    )


def format_summary_table(columns: list[tuple[str, AggregateStats]]) -> str:
    """Aligned text table, metrics as rows and one column per aggregate."""
    headers = ["Metric"] + [label for label, _ in columns]
    rows = [headers]
    for label, attr, decimals in _TABLE_ROWS:
        row = [label] + [f"{getattr(stats, attr):.{decimals}f}" for _, stats in columns]
        rows.append(row)
    rows.append(["Runs"] + [str(stats.n_runs) for _, stats in columns])
    widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
    out = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out)


# --- reference comparison ----------------------------------------------------

# Reference summaries for the 0/1/2 agent configurations, used by
# the --verify flag to call out where recomputed aggregates differ.
REFERENCE_AGGREGATES = {
    0: AggregateStats(
        ea=0,
        n_runs=30,
        success_rate_pct=0.0,
        avg_duration_s=14.0,
        duration_std_s=7.9,
        avg_steps=168.3,
        avg_reformed=0.00,
        reformed_std=0.00,
        avg_malicious=1.00,
        malicious_std=0.00,
    ),
    1: AggregateStats(
        ea=1,
        n_runs=30,
        success_rate_pct=7.4,
        avg_duration_s=23.9,
        duration_std_s=28.1,
        avg_steps=263.5,
        avg_reformed=0.20,
        reformed_std=0.41,
        avg_malicious=1.00,
        malicious_std=0.00,
    ),
    2: AggregateStats(
        ea=2,
        n_runs=30,
        success_rate_pct=26.7,
        avg_duration_s=53.5,
        duration_std_s=42.7,
        avg_steps=559.1,
        avg_reformed=0.63,
        reformed_std=0.49,
        avg_malicious=1.00,
        malicious_std=0.00,
    ),
}


def verify_against_reference(stats: AggregateStats) -> list[str]:
    """Divergence messages versus the reference column for this ea count.

    A metric diverges when it disagrees with the reference beyond the
    reference's own print precision. Empty means agreement everywhere;
    a single message flags a configuration with no reference column.
    """
    ref = REFERENCE_AGGREGATES.get(stats.ea)
    if ref is None:
        return [f"no reference column for ea={stats.ea}"]
    messages = []
    for label, attr, decimals in _TABLE_ROWS:
        got = getattr(stats, attr)
        expected = getattr(ref, attr)
        tolerance = 0.5 * 10.0 ** (-decimals) + 1e-9
        if abs(got - expected) > tolerance:
            messages.append(f"{label}: recomputed {got:.{decimals + 1}f} vs reference {expected:.{decimals}f}")
    return messages
