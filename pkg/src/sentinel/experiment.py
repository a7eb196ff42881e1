"""Batch harness: seeded episodes, per-run records, and their CSV format.

A batch derives one 64-bit seed per run from (base_seed, run_index) with the
splitmix64 finalizer, so records depend only on those two integers and the
config, never on scheduling. SENTINEL_THREADS caps worker processes
(unset or 1 runs in-process, 0 picks the CPU count).
"""

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import SimConfig, validate
from .dynamics import step
from .world import DroneRole, WorldState, initial_world

CSV_HEADER = "run,ea,result,steps,time_s,healthy,malicious,reformed"

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class RecordError(ValueError):
    pass


class RecordSchemaError(RecordError):
    """The file's header line is not the record schema."""


class RecordParseError(RecordError):
    """A data line that does not parse; carries its 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class RecordInvariantError(RecordError):
    pass


@dataclass(frozen=True)
class RunRecord:
    """One episode, as a row of the results table.

    healthy and malicious are the initial role counts; reformed counts
    drones converted by the end of the run. time_s is simulated duration,
    steps divided by the configured steps-per-second.
    """

    run: int
    ea: int
    result: str
    steps: int
    time_s: float
    healthy: int
    malicious: int
    reformed: int


def check_record(
    rec: RunRecord,
    *,
    time_limit_steps: int | None = None,
    fps: int | None = None,
    total_drones: int | None = None,
    check_time: bool = True,
) -> None:
    """Raise RecordInvariantError on a malformed record.

    Structural invariants are always enforced. The config-dependent ones run
    only when the matching expectation is supplied, because a record does
    not carry its config. check_time=False skips the time_s consistency
    check; transcriptions of wall-clock timings need that.
    """
    bad = []
    if rec.run < 1:
        bad.append(f"run {rec.run} is not 1-based")
    if rec.ea < 0:
        bad.append(f"ea {rec.ea} negative")
    if rec.result not in ("success", "fail"):
        bad.append(f"result {rec.result!r}")
    if rec.steps < 0:
        bad.append(f"steps {rec.steps} negative")
    if rec.time_s < 0:
        bad.append(f"time_s {rec.time_s} negative")
    if min(rec.healthy, rec.malicious, rec.reformed) < 0:
        bad.append("negative role count")
    if rec.reformed > rec.malicious:
        bad.append(f"reformed {rec.reformed} > malicious {rec.malicious}")
    if time_limit_steps is not None:
        if (rec.result == "success") != (rec.steps == time_limit_steps):
            bad.append(f"result {rec.result!r} inconsistent with steps {rec.steps} of {time_limit_steps}")
    if fps is not None and check_time:
        expected = round(rec.steps / fps, 2)
        if abs(rec.time_s - expected) > 1e-9:
            bad.append(f"time_s {rec.time_s} != steps/fps {expected}")
    if total_drones is not None and rec.healthy + rec.malicious != total_drones:
        bad.append(f"healthy {rec.healthy} + malicious {rec.malicious} != {total_drones}")
    if bad:
        raise RecordInvariantError(f"run {rec.run}: " + "; ".join(bad))


def mix_seed(base_seed: int, run_index: int) -> int:
    """Per-run seed: splitmix64 finalizer of base_seed + run_index * gamma."""
    z = (base_seed + run_index * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def run_episode(cfg: SimConfig, run_index: int, seed: int) -> tuple[RunRecord, WorldState]:
    """Play one episode to termination and summarize it as a record."""
    validate(cfg)
    rng = random.Random(seed)
    world = initial_world(cfg, rng)
    while world.outcome is None:
        step(world, cfg, rng)
    record = RunRecord(
        run=run_index,
        ea=cfg.num_eas,
        result=world.outcome.value,
        steps=world.step,
        time_s=round(world.step / cfg.fps, 2),
        healthy=cfg.total_drones - cfg.num_malicious,
        malicious=cfg.num_malicious,
        reformed=sum(1 for d in world.drones if d.role is DroneRole.REFORMED),
    )
    check_record(record, time_limit_steps=cfg.time_limit_steps, fps=cfg.fps, total_drones=cfg.total_drones)
    return record, world


def _episode_record(args) -> RunRecord:
    cfg, run_index, seed = args
    return run_episode(cfg, run_index, seed)[0]


def _worker_count(num_runs: int) -> int:
    raw = os.environ.get("SENTINEL_THREADS")
    if raw is None:
        return 1
    try:
        requested = int(raw)
    except ValueError:
        return 1
    if requested < 0:
        return 1
    if requested == 0:
        requested = os.cpu_count() or 1
    return max(1, min(requested, num_runs))


def run_batch(cfg: SimConfig, num_runs: int, base_seed: int) -> list[RunRecord]:
    """Records for runs 1..num_runs, in run order regardless of scheduling."""
    validate(cfg)
    if num_runs < 1:
        raise ValueError(f"num_runs must be >= 1, got {num_runs}")
    tasks = [(cfg, i, mix_seed(base_seed, i)) for i in range(1, num_runs + 1)]
    workers = _worker_count(num_runs)
    if workers <= 1:
        return [_episode_record(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_episode_record, tasks))


def format_record(rec: RunRecord) -> str:
    return (
        f"{rec.run},{rec.ea},{rec.result},{rec.steps},{rec.time_s:.2f},"
        f"{rec.healthy},{rec.malicious},{rec.reformed}"
    )


def write_records(records: list[RunRecord], dest) -> None:
    """Write the records table; newline line endings, 2-decimal time_s."""
    if not records:
        raise RecordError("refusing to write an empty record table")
    for rec in records:
        check_record(rec)
    lines = [CSV_HEADER] + [format_record(r) for r in records]
    Path(dest).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_record_line(line: str, line_number: int) -> RunRecord:
    parts = line.split(",")
    if len(parts) != 8:
        raise RecordParseError(line_number, f"expected 8 fields, got {len(parts)}")
    try:
        rec = RunRecord(
            run=int(parts[0]),
            ea=int(parts[1]),
            result=parts[2],
            steps=int(parts[3]),
            time_s=float(parts[4]),
            healthy=int(parts[5]),
            malicious=int(parts[6]),
            reformed=int(parts[7]),
        )
    except ValueError as exc:
        raise RecordParseError(line_number, str(exc)) from None
    return rec


def read_records(
    source,
    *,
    time_limit_steps: int | None = None,
    fps: int | None = None,
    total_drones: int | None = None,
    check_time: bool = True,
) -> list[RunRecord]:
    """Parse a records file; errors carry 1-based line numbers.

    Keyword expectations enable the config-dependent invariant checks, as in
    check_record.
    """
    text = Path(source).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        found = lines[0] if lines else "<empty file>"
        raise RecordSchemaError(f"expected header {CSV_HEADER!r}, found {found!r}")
    records = []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        rec = parse_record_line(line, line_number)
        try:
            check_record(
                rec,
                time_limit_steps=time_limit_steps,
                fps=fps,
                total_drones=total_drones,
                check_time=check_time,
            )
        except RecordInvariantError as exc:
            raise RecordParseError(line_number, str(exc)) from None
        records.append(rec)
    return records
