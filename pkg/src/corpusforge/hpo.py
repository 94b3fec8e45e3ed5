"""Hyperparameter search driving an external evaluator process.

Two procedures: plain random search (uniform samples with replacement) and
the sequential lock-in coordinate search, which sweeps the dimensions in
declared order, fixes each winner, and leaves not-yet-swept dimensions at
their first declared value. The evaluator contract is process-based: the
command receives a JSON config file path and must print a numeric score as
the last line of stdout; a nonzero exit marks the trial failed.

Trial logs persist as JSONL without volatile fields (durations stay
in-memory) so seeded reruns are byte-identical, and an existing log lets a
restarted search skip completed trials.
"""

from __future__ import annotations

import json
import random
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from corpusforge.errors import ConfigError, DataError


@dataclass
class HyperparamSpace:
    dims: list[tuple[str, list]]

    def __post_init__(self) -> None:
        if not self.dims:
            raise ConfigError("hyperparameter space needs at least one dimension")
        names = [name for name, _ in self.dims]
        if len(set(names)) != len(names):
            raise ConfigError("dimension names must be unique")
        for name, values in self.dims:
            if not values:
                raise ConfigError(f"dimension {name!r} has no candidates")

    @classmethod
    def from_dict(cls, doc: dict) -> "HyperparamSpace":
        try:
            dims = [(d["name"], list(d["values"])) for d in doc["dims"]]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed space document: {exc}") from exc
        return cls(dims=dims)

    @classmethod
    def load(cls, path: str | Path) -> "HyperparamSpace":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def total_configs(self) -> int:
        total = 1
        for _, values in self.dims:
            total *= len(values)
        return total


@dataclass
class Trial:
    index: int
    phase: str
    config: dict
    score: float | None
    status: str  # "ok" | "failed"
    output: str = ""
    duration_s: float = 0.0

    def log_record(self) -> dict:
        # duration is wall-clock noise; keeping it out of the log makes
        # seeded reruns byte-identical.
        return {
            "index": self.index,
            "phase": self.phase,
            "config": self.config,
            "score": self.score,
            "status": self.status,
            "output": self.output,
        }


class CommandEvaluator:
    """Runs `cmd <config.json>` in a shell and parses the final stdout line."""

    def __init__(self, cmd: str):
        self.cmd = cmd

    def __call__(self, config: dict) -> float:
        with tempfile.NamedTemporaryFile(
            "w", suffix=".json", prefix="cfg-", delete=False
        ) as fh:
            json.dump(config, fh)
            cfg_path = fh.name
        try:
            proc = subprocess.run(
                f"{self.cmd} {cfg_path}",
                shell=True,
                capture_output=True,
                text=True,
                timeout=3600,
            )
            if proc.returncode != 0:
                raise RuntimeError(
                    f"evaluator exited {proc.returncode}: {proc.stderr.strip()[-500:]}"
                )
            lines = [line for line in proc.stdout.strip().splitlines() if line.strip()]
            if not lines:
                raise RuntimeError("evaluator produced no output")
            return float(lines[-1])
        finally:
            Path(cfg_path).unlink(missing_ok=True)


class TrialLog:
    """Index-ordered JSONL trial log with resume support."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self.existing: list[dict] = []
        if self.path and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self.existing.append(json.loads(line))

    def cached(self, index: int, phase: str, config: dict) -> dict | None:
        if index < len(self.existing):
            rec = self.existing[index]
            if rec["phase"] != phase or rec["config"] != config:
                raise ConfigError(
                    f"trial log {self.path} does not match this search at index"
                    f" {index}; refusing to resume"
                )
            return rec
        return None

    def append(self, trial: Trial) -> None:
        if self.path is None:
            return
        if trial.index < len(self.existing):
            return  # already persisted by an earlier run
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(trial.log_record(), sort_keys=True) + "\n")
        self.existing.append(trial.log_record())


def _run_one(evaluator, index: int, phase: str, config: dict) -> Trial:
    start = time.monotonic()
    try:
        score = float(evaluator(config))
        status, output = "ok", ""
    except Exception as exc:  # evaluator failures never stop the search
        score, status, output = None, "failed", str(exc)[-500:]
    return Trial(
        index=index,
        phase=phase,
        config=config,
        score=score,
        status=status,
        output=output,
        duration_s=time.monotonic() - start,
    )


def _run_batch(evaluator, jobs: int, specs: list[tuple[int, str, dict]],
               log: TrialLog) -> list[Trial]:
    """Evaluate trial specs (skipping cached ones), persisting each trial to
    the log incrementally, in index order regardless of completion order."""
    trials: dict[int, Trial] = {}
    pending = []
    for index, phase, config in specs:
        rec = log.cached(index, phase, config)
        if rec is not None:
            trials[index] = Trial(
                index=index, phase=phase, config=config,
                score=rec["score"], status=rec["status"], output=rec["output"],
            )
        else:
            pending.append((index, phase, config))

    order = [index for index, _, _ in specs]
    flushed = 0

    def flush():
        # append every trial whose predecessors (in spec order) are done
        nonlocal flushed
        while flushed < len(order) and order[flushed] in trials:
            log.append(trials[order[flushed]])
            flushed += 1

    flush()  # cached prefix, if any
    if pending:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(_run_one, evaluator, *spec) for spec in pending
                ]
                for future in futures:  # spec order keeps the log deterministic
                    trial = future.result()
                    trials[trial.index] = trial
                    flush()
        else:
            for spec in pending:
                trials[spec[0]] = _run_one(evaluator, *spec)
                flush()
    flush()
    return [trials[index] for index in order]


def random_search(
    space: HyperparamSpace,
    evaluator,
    n_trials: int,
    seed: int,
    log_path: str | Path | None = None,
    jobs: int = 1,
) -> tuple[Trial, list[Trial]]:
    """Uniform independent samples (with replacement); best ok trial wins."""
    if n_trials < 1:
        raise ConfigError("n_trials must be at least 1")
    rng = random.Random(seed)
    specs = []
    for index in range(n_trials):
        config = {name: rng.choice(values) for name, values in space.dims}
        specs.append((index, "random", config))
    log = TrialLog(log_path)
    trials = _run_batch(evaluator, jobs, specs, log)
    ok = [t for t in trials if t.status == "ok"]
    if not ok:
        err = DataError(f"all {n_trials} trials failed")
        err.trials = trials
        raise err
    best = max(ok, key=lambda t: (t.score, -t.index))
    return best, trials


def coordinate_lockin_search(
    space: HyperparamSpace,
    evaluator,
    seed: int = 0,
    log_path: str | Path | None = None,
    jobs: int = 1,
) -> tuple[dict, list[Trial]]:
    """Sweep dimensions in declared order; lock each argmax before moving
    on. Unswept dimensions sit at their first declared value, so the total
    number of evaluations is the sum of the dimension sizes."""
    del seed  # order is fully determined by the space; kept for interface parity
    locked: dict = {}
    all_trials: list[Trial] = []
    log = TrialLog(log_path)
    index = 0
    for dim_pos, (name, values) in enumerate(space.dims):
        defaults = {
            later_name: later_values[0]
            for later_name, later_values in space.dims[dim_pos + 1:]
        }
        specs = []
        for value in values:
            config = {**locked, name: value, **defaults}
            # Re-order keys to the declared dimension order for stable logs.
            config = {d: config[d] for d, _ in space.dims}
            specs.append((index, f"lockin:{name}", config))
            index += 1
        trials = _run_batch(evaluator, jobs, specs, log)
        all_trials.extend(trials)
        best_value = None
        best_score = None
        for value, trial in zip(values, trials):
            if trial.status != "ok":
                continue
            if best_score is None or trial.score > best_score:
                best_score = trial.score
                best_value = value
        if best_value is None:
            err = DataError(f"every candidate for dimension {name!r} failed")
            err.trials = all_trials
            raise err
        locked[name] = best_value
    return locked, all_trials
