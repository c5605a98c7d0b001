#!/usr/bin/env python3
"""Standalone defectbench benchmark script.

No pytest-benchmark dependency required.

Usage:
    python benchmarks/run.py [N ...]        (default: 16 32 64)

Output:
    Rich table with P50/P95/Max for each stage of a half-chain sweep point with a
    J* = 0.2 centered defect, at the precision the workbench would use for that N:
    - ground state (Schur form of the Majorana kernel)
    - entanglement Hamiltonian of the half chain
    - entropy and negativity
    plus peak RSS (via resource.getrusage).
"""

from __future__ import annotations

import resource
import statistics
import sys
import time
from pathlib import Path
from typing import Callable

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

# Add project src to path if running from repo root
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from defectbench.chain import build_chain, centered_defect_bond
from defectbench.gaussian import chain_ground_state, entanglement_hamiltonian, restrict
from defectbench.models import BipartitionSpec, DefectSpec, SubsystemSpec
from defectbench.observables import entropy, log_negativity
from defectbench.precision import PrecisionContext

console = Console()

ROUNDS = 3
DEFAULT_SIZES = (16, 32, 64)


def _timeit(fn: Callable, rounds: int = ROUNDS) -> list[float]:
    """Run fn `rounds` times and return list of elapsed seconds."""
    times = []
    for _ in range(rounds):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return times


def _percentile(data: list[float], pct: float) -> float:
    data = sorted(data)
    k = (len(data) - 1) * pct / 100
    lo, hi = int(k), min(int(k) + 1, len(data) - 1)
    return data[lo] + (data[hi] - data[lo]) * (k - lo)


def _ms(s: float) -> str:
    return f"{s * 1000:.1f}ms"


def bench_size(n_sites: int) -> list[tuple[str, list[float]]]:
    ctx = PrecisionContext.for_system_size(n_sites)
    half = SubsystemSpec(start=0, length=n_sites // 2)
    bond = centered_defect_bond(half, n_sites)
    spec = build_chain(n_sites, [DefectSpec(kind="energy", bond=bond, strength="0.2")])

    gamma = chain_ground_state(spec, ctx)
    gamma_a = restrict(gamma, half)
    cut = BipartitionSpec(cut=n_sites // 4)
    return [
        ("ground state", _timeit(lambda: chain_ground_state(spec, ctx))),
        ("entanglement Hamiltonian", _timeit(lambda: entanglement_hamiltonian(gamma_a, ctx))),
        ("entropy", _timeit(lambda: entropy(gamma_a, ctx))),
        ("negativity", _timeit(lambda: log_negativity(gamma_a, cut, ctx))),
    ]


def main(sizes: list[int]) -> None:
    console.print(Panel(
        f"[bold]defectbench Benchmark[/bold]\n"
        f"Chain sizes: [cyan]{', '.join(map(str, sizes))}[/cyan]\n"
        f"Rounds per stage: [cyan]{ROUNDS}[/cyan]",
        border_style="blue",
    ))

    table = Table(title="defectbench Benchmark Results", border_style="green")
    table.add_column("N", justify="right", style="bold")
    table.add_column("dps", justify="right")
    table.add_column("Stage", style="bold")
    table.add_column("P50", justify="right")
    table.add_column("P95", justify="right", style="yellow")
    table.add_column("Max", justify="right")

    totals: dict[int, float] = {}
    for n in sizes:
        console.print(f"  [dim]Benchmarking N={n}...[/dim]")
        dps = PrecisionContext.for_system_size(n).decimal_digits
        stages = bench_size(n)
        totals[n] = sum(statistics.median(times) for _, times in stages)
        for stage, times in stages:
            table.add_row(
                str(n),
                str(dps),
                stage,
                _ms(_percentile(times, 50)),
                _ms(_percentile(times, 95)),
                _ms(max(times)),
            )

    console.print()
    console.print(table)

    summary = Table(title="Summary", border_style="blue")
    summary.add_column("Metric", style="bold")
    summary.add_column("Value", justify="right")
    for n, total in totals.items():
        summary.add_row(f"Sweep point N={n} (median)", _ms(total))
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    summary.add_row("Peak RSS", f"{peak:.1f} MB")
    console.print(summary)


if __name__ == "__main__":
    try:
        requested = [int(arg) for arg in sys.argv[1:]] or list(DEFAULT_SIZES)
    except ValueError:
        console.print("Usage: python benchmarks/run.py [N ...]")
        sys.exit(1)
    main(requested)
