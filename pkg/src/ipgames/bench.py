"""Benchmark harness: seeded instance suites, per-run records, CSV tables.

Each suite regenerates its instances from (kind, parameters, ins, seed),
runs the prescribed methods, verifies every output independently, and
writes one CSV row per run plus per-size average rows.  Timeouts are
marked "tl" in the time column.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from .driver import EQUILIBRIUM, TIME_LIMIT, SgmConfig, run
from .games import gen_keg, gen_knapsack, gen_lot, potential_ascent
from .games.io import from_json, to_json
from .model import Profile, SampledGame, expected_payoff
from .support_search import find_ne
from .verify import enumerate_strategies, verify_ce, verify_ne

DEFAULT_TIME_LIMIT = 3600.0
DEFAULT_MAX_ITERATIONS = 10_000

# ε conventions per game kind: exact equilibria for the purely binary
# games, a small slack where strategies are continuous.
DEFAULT_EPSILON = {
    "knapsack": 0.0,
    "keg": 0.0,
    "lotsizing": 1e-6,
    "duopoly": 1e-6,
    "binary": 0.0,
}

DEFAULT_INITIALIZATION = {"keg": "optimistic"}

CSV_HEADER = [
    "suite", "game", "size", "ins", "method", "eps", "status", "time_ms",
    "iter", "numb_back", "pNE", "mNE", "S1", "S2", "S3",
    "supp1", "supp2", "supp3", "verified", "max_gap",
    "ce_supp", "tau_NE", "social_tau", "social_sigma", "welfare_gap",
    "price_NE", "dec_A", "dec_B",
]


@dataclass
class RunRecord:
    """Flat result of one solve, ready for JSON or a CSV row."""

    instance: str
    game: str
    size: str
    ins: int
    method: str
    epsilon: float
    status: str
    time_ms: float
    iterations: Optional[int] = None
    backtracks: Optional[int] = None
    kind: Optional[str] = None              # "pure" or "mixed"
    support_sizes: Optional[tuple] = None
    sampled_sizes: Optional[tuple] = None
    payoffs: Optional[tuple] = None
    verified: Optional[bool] = None
    max_gap: Optional[float] = None
    ce_support: Optional[int] = None
    tau_ne: Optional[bool] = None
    social_tau: Optional[float] = None
    social_sigma: Optional[float] = None
    welfare_gap: Optional[float] = None
    price_of_ne: Optional[float] = None
    standalone_decrease: Optional[tuple] = None
    suite: str = ""

    def to_dict(self) -> dict:
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out


def _fresh_copy(game):
    """Round-trip through the JSON schema so verification shares nothing
    with the solver run, caches included."""
    return from_json(to_json(game))


def _profile_supports(profile: Profile) -> tuple:
    return tuple(len(mix.atoms) for mix in profile.players)


def _social(game, profile: Profile) -> float:
    return sum(expected_payoff(game, profile, p) for p in range(game.num_players))


def solve_instance(game, kind: str, method: str, *, label: str, size: str,
                   ins: int, epsilon: Optional[float] = None,
                   max_iterations: int = DEFAULT_MAX_ITERATIONS,
                   time_limit: float = DEFAULT_TIME_LIMIT,
                   initialization_mode=None, suite: str = "",
                   ):
    """Run one method on one instance and verify the result independently.

    Returns (record, profile, joint); profile or joint is None when the
    method did not produce that kind of certificate.
    """
    eps = DEFAULT_EPSILON.get(kind, 0.0) if epsilon is None else epsilon
    init = initialization_mode or DEFAULT_INITIALIZATION.get(kind, "alone")
    record = RunRecord(instance=label, game=kind, size=size, ins=ins,
                       method=method, epsilon=eps, status=EQUILIBRIUM,
                       time_ms=0.0, suite=suite)
    profile = None
    joint = None

    start = time.monotonic()
    if method == "potential":
        if kind != "lotsizing":
            raise ValueError("potential ascent applies to lot-sizing games only")
        profile = potential_ascent(game)
        record.time_ms = (time.monotonic() - start) * 1000.0
    elif method == "oracle":
        lists = [
            enumerate_strategies(game, p, maximal=(kind == "keg"))
            for p in range(game.num_players)
        ]
        start = time.monotonic()  # enumeration time excluded, like the solve loop's
        sampled = SampledGame(game, lists)
        eq = find_ne(sampled)
        record.time_ms = (time.monotonic() - start) * 1000.0
        if eq is None:
            raise RuntimeError("fully enumerated game admitted no equilibrium")
        profile = eq.to_profile(sampled)
        record.sampled_sizes = sampled.sizes()
    else:
        config = SgmConfig(epsilon=eps, max_iterations=max_iterations,
                           time_limit=time_limit, method=method,
                           initialization_mode=init)
        outcome = run(game, config)
        record.time_ms = outcome.wall_time * 1000.0
        record.status = outcome.status
        record.iterations = outcome.iterations
        record.backtracks = outcome.backtracks
        record.sampled_sizes = outcome.sizes
        record.payoffs = outcome.payoffs
        if method == "ce":
            joint = outcome.joint
            record.ce_support = len(joint.atoms) if joint is not None else None
            record.tau_ne = outcome.tau_ne
            profile = outcome.profile
        else:
            profile = outcome.profile

    fresh = _fresh_copy(game)
    if method == "ce":
        if joint is not None:
            report = verify_ce(fresh, joint, eps)
            record.verified = report.passed and record.status == EQUILIBRIUM
            record.max_gap = report.max_gap
            record.social_tau = sum(report.current)
        if profile is not None:
            record.social_sigma = _social(fresh, profile)
            record.support_sizes = _profile_supports(profile)
            record.kind = "pure" if profile.is_pure() else "mixed"
    elif profile is not None:
        report = verify_ne(fresh, profile, eps)
        record.verified = report.passed and record.status == EQUILIBRIUM
        record.max_gap = report.max_gap
        record.kind = "pure" if profile.is_pure() else "mixed"
        record.support_sizes = _profile_supports(profile)
        record.payoffs = report.current
        record.social_sigma = sum(report.current)

    if kind == "keg" and profile is not None:
        optimum, _ = game.social_optimum()
        welfare = _social(fresh, profile)
        record.price_of_ne = welfare / optimum if optimum > 1e-9 else 1.0
        decreases = []
        for p in range(game.num_players):
            value = expected_payoff(fresh, profile, p)
            alone = game.standalone_value(p)
            decreases.append((value - alone) / value if value > 1e-9 else 0.0)
        record.standalone_decrease = tuple(decreases)
    return record, profile, joint


# ---------------------------------------------------------------------------
# suites

@dataclass(frozen=True)
class Job:
    suite: str
    kind: str
    params: tuple
    size: str
    ins: int
    method: str
    seed: int
    time_limit: float


def _make_game(job: Job):
    if job.kind == "knapsack":
        n, m = job.params
        return gen_knapsack(n, m, job.ins, job.seed)
    if job.kind == "keg":
        vertices, density = job.params
        return gen_keg(vertices, density, job.ins, job.seed)
    if job.kind == "lotsizing":
        m, periods = job.params
        return gen_lot(m, periods, job.ins, job.seed)
    raise ValueError(f"unknown game kind {job.kind!r}")


def _run_job(job: Job) -> RunRecord:
    game = _make_game(job)
    label = f"{job.kind}-{job.size}-ins{job.ins}"
    record, _, _ = solve_instance(
        game, job.kind, job.method, label=label, size=job.size, ins=job.ins,
        time_limit=job.time_limit, suite=job.suite,
    )
    return record


def build_suite(name: str, seed: int = 0,
                time_limit: float = DEFAULT_TIME_LIMIT) -> list[Job]:
    instances = 10
    jobs: list[Job] = []

    def add(kind, params, size, methods):
        for ins in range(instances):
            for method in methods:
                jobs.append(Job(name, kind, params, size, ins, method, seed, time_limit))

    if name == "knapsack-2p":
        for n in (20, 40):
            add("knapsack", (n, 2), f"n{n}-m2", ("msgm", "sgm"))
    elif name == "knapsack-3p":
        for n in (10, 20):
            add("knapsack", (n, 3), f"n{n}-m3", ("msgm", "sgm"))
    elif name == "keg":
        for vertices, density in ((20, 0.15), (40, 0.10), (80, 0.06)):
            add("keg", (vertices, density), f"V{vertices}", ("msgm", "sgm", "ce"))
    elif name == "lotsizing":
        for m in (2, 3):
            for periods in (10, 20, 50, 100):
                add("lotsizing", (m, periods), f"m{m}-T{periods}",
                    ("msgm", "sgm", "potential"))
    elif name == "ce-knapsack":
        add("knapsack", (20, 2), "n20-m2", ("ce", "msgm"))
        add("knapsack", (10, 3), "n10-m3", ("ce", "msgm"))
    elif name == "direct-pns":
        for n in (5, 7):
            for m in (2, 3):
                add("knapsack", (n, m), f"n{n}-m{m}", ("msgm", "oracle"))
    else:
        raise ValueError(f"unknown suite {name!r}")
    return jobs


def run_suite(name: str, seed: int = 0, jobs: int = 1,
              time_limit: float = DEFAULT_TIME_LIMIT) -> list[RunRecord]:
    pending = build_suite(name, seed, time_limit)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_job, pending))
    else:
        records = [_run_job(job) for job in pending]
    _fill_welfare_gaps(records)
    return records


def _fill_welfare_gaps(records: list[RunRecord]) -> None:
    """On CE rows, compare the distribution's welfare with the welfare of
    the equilibrium found on the same instance by the backtracking run."""
    by_key = {}
    for rec in records:
        if rec.method == "msgm" and rec.social_sigma is not None:
            by_key[(rec.suite, rec.size, rec.ins)] = rec.social_sigma
    for rec in records:
        if rec.method != "ce" or rec.social_tau is None:
            continue
        sigma = by_key.get((rec.suite, rec.size, rec.ins))
        if sigma is not None and abs(rec.social_tau) > 1e-9:
            rec.welfare_gap = 1.0 - sigma / rec.social_tau


# ---------------------------------------------------------------------------
# CSV

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _row(rec: RunRecord) -> list[str]:
    timed_out = rec.status == TIME_LIMIT
    sizes = rec.sampled_sizes or ()
    supports = rec.support_sizes or ()
    dec = rec.standalone_decrease or ()
    return [
        rec.suite, rec.game, rec.size, str(rec.ins), rec.method,
        _fmt(rec.epsilon), rec.status,
        "tl" if timed_out else _fmt(rec.time_ms),
        _fmt(rec.iterations), _fmt(rec.backtracks),
        _fmt(rec.kind == "pure" if rec.kind else None),
        _fmt(rec.kind == "mixed" if rec.kind else None),
        _fmt(sizes[0] if len(sizes) > 0 else None),
        _fmt(sizes[1] if len(sizes) > 1 else None),
        _fmt(sizes[2] if len(sizes) > 2 else None),
        _fmt(supports[0] if len(supports) > 0 else None),
        _fmt(supports[1] if len(supports) > 1 else None),
        _fmt(supports[2] if len(supports) > 2 else None),
        _fmt(rec.verified), _fmt(rec.max_gap),
        _fmt(rec.ce_support), _fmt(rec.tau_ne),
        _fmt(rec.social_tau), _fmt(rec.social_sigma), _fmt(rec.welfare_gap),
        _fmt(rec.price_of_ne),
        _fmt(dec[0] if len(dec) > 0 else None),
        _fmt(dec[1] if len(dec) > 1 else None),
    ]


def _average_row(group: list[RunRecord]) -> list[str]:
    sample = group[0]
    completed = [r for r in group if r.status != TIME_LIMIT]

    def avg(pick):
        values = [pick(r) for r in completed]
        values = [v for v in values if v is not None]
        return sum(values) / len(values) if values else None

    def count(pick):
        return sum(1 for r in group if pick(r))

    def nth(seq_pick, i):
        def pick(r):
            seq = seq_pick(r) or ()
            return seq[i] if len(seq) > i else None
        return pick

    return [
        sample.suite, sample.game, sample.size, "avg", sample.method,
        _fmt(sample.epsilon), "",
        "tl" if not completed else _fmt(avg(lambda r: r.time_ms)),
        _fmt(avg(lambda r: r.iterations)), _fmt(avg(lambda r: r.backtracks)),
        str(count(lambda r: r.kind == "pure")),
        str(count(lambda r: r.kind == "mixed")),
        _fmt(avg(nth(lambda r: r.sampled_sizes, 0))),
        _fmt(avg(nth(lambda r: r.sampled_sizes, 1))),
        _fmt(avg(nth(lambda r: r.sampled_sizes, 2))),
        _fmt(avg(nth(lambda r: r.support_sizes, 0))),
        _fmt(avg(nth(lambda r: r.support_sizes, 1))),
        _fmt(avg(nth(lambda r: r.support_sizes, 2))),
        str(count(lambda r: r.verified)), _fmt(avg(lambda r: r.max_gap)),
        _fmt(avg(lambda r: r.ce_support)), str(count(lambda r: r.tau_ne)),
        _fmt(avg(lambda r: r.social_tau)), _fmt(avg(lambda r: r.social_sigma)),
        _fmt(avg(lambda r: r.welfare_gap)),
        _fmt(avg(lambda r: r.price_of_ne)),
        _fmt(avg(nth(lambda r: r.standalone_decrease, 0))),
        _fmt(avg(nth(lambda r: r.standalone_decrease, 1))),
    ]


def render_csv(records: Sequence[RunRecord]) -> str:
    lines = [",".join(CSV_HEADER)]
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        lines.append(",".join(_row(rec)))
        groups.setdefault((rec.suite, rec.size, rec.method), []).append(rec)
    for group in groups.values():
        lines.append(",".join(_average_row(group)))
    return "\n".join(lines) + "\n"


def write_csv(records: Sequence[RunRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(render_csv(records))
