"""Sweep orchestration: chains, observables, precision retries and run outputs.

Sweep points run on a thread pool; their rows are buffered and written afterwards in the
order of the config's sweep lists, so identical configs produce identical CSV files apart
from the ``wall_time_ms`` column.
"""

from __future__ import annotations

import logging
import platform
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal
from importlib import metadata
from pathlib import Path
from typing import Any

from . import __version__
from .analysis import c_eff, fit_entropy_scaling, nn_profile, symmetric_hopping
from .chain import (
    antipodal_defect_bonds,
    boundary_defect_bond,
    build_chain,
    centered_defect_bond,
    complement,
    defect_summary,
    majorana_hamiltonian,
    off_center_defect_bond,
)
from .config import ExperimentConfig, RuntimeSettings
from .errors import (
    ConfigError,
    NonConvergenceError,
    OracleRangeError,
    PrecisionEscalationError,
    SingularMatrixError,
    SpecError,
)
from .export import matrix_records, render, write_manifest, write_matrix, write_records
from .gaussian import (
    CovarianceMatrix,
    chain_ground_state,
    entanglement_hamiltonian,
    many_body_spectrum,
    restrict,
    single_particle_spectrum,
    state_energy,
)
from .linalg import SkewMatrix
from .models import BipartitionSpec, ChainSpec, DefectSpec, SubsystemSpec, SweepRecord
from .observables import entropy, fidelity, log_negativity, renyi_entropy, to_bits
from .oracle import (
    align_with_covariance,
    covariance_from_state,
    oracle_context,
    rdm_spectrum,
    spin_ed_ground,
)
from .precision import MIN_DIGITS, Number, PrecisionContext

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ORACLE_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_PRECISION = 3

ORACLE_MAX_SITES = 12
ORACLE_TOLERANCE = 1e-8

# Observables that need the ground-state covariance of the chain.
_STATE_OBSERVABLES = {
    "k_matrix",
    "nn_profile",
    "symmetric_hopping",
    "entropy",
    "renyi",
    "entropy_profile",
    "spectrum",
    "negativity",
    "fidelity",
    "scaling_fit",
}
_HAMILTONIAN_OBSERVABLES = {"k_matrix", "nn_profile", "symmetric_hopping"}
_NUMERIC_FAILURES = (PrecisionEscalationError, NonConvergenceError, SingularMatrixError)


# ─── Sweep geometry ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SweepPoint:
    index: int
    n_sites: int
    j_star: Decimal | None
    chain: ChainSpec
    region: SubsystemSpec
    measured: SubsystemSpec

    @property
    def j_label(self) -> str:
        return "" if self.j_star is None else str(self.j_star)


def defect_bonds(config: ExperimentConfig, region: SubsystemSpec, n_sites: int) -> list[int]:
    """Bonds that carry the swept defect under the configured placement."""
    placement = config.placement
    if placement == "boundary":
        return [boundary_defect_bond(region, n_sites)]
    if placement == "antipodal":
        return list(antipodal_defect_bonds(region, n_sites))
    if placement == "off_center":
        return [off_center_defect_bond(region, config.offset, n_sites)]
    return [centered_defect_bond(region, n_sites)]


def build_point_chain(
    config: ExperimentConfig, n_sites: int, j_star: Decimal | None, region: SubsystemSpec
) -> ChainSpec:
    defects = list(config.defects)
    if config.defect_kind != "none":
        strength = j_star if config.defect_kind == "energy" else None
        defects += [
            DefectSpec(kind=config.defect_kind, bond=bond, strength=strength)
            for bond in defect_bonds(config, region, n_sites)
        ]
    return build_chain(n_sites, defects, config.boundary_sign)


def plan_sweep(config: ExperimentConfig) -> list[SweepPoint]:
    """All sweep points in config order; geometry errors surface as ConfigError."""
    points = []
    problems = []
    for index, (n, j_star) in enumerate(config.sweep_points()):
        region = SubsystemSpec(start=config.subsystem_start, length=config.length_for(n))
        try:
            chain = build_point_chain(config, n, j_star, region)
            measured = complement(region, n) if config.placement == "complement" else region
        except SpecError as exc:
            problems.append(f"N={n}, j_star={j_star}: {exc}")
            continue
        points.append(SweepPoint(index, n, j_star, chain, region, measured))
    if problems:
        raise ConfigError(problems)
    return points


# ─── Point evaluation ────────────────────────────────────────────────────────


@dataclass
class PointResult:
    point: SweepPoint
    dps: int
    records: dict[str, list[SweepRecord]] = field(default_factory=dict)
    samples: list[tuple[int, int, Number]] = field(default_factory=list)
    zero_modes: int = 0
    parity: int | None = None
    parity_fixed: bool = False
    escalated: bool = False
    k_matrix: SkewMatrix | None = None
    error: str | None = None

    def summary(self) -> dict[str, Any]:
        return {
            "n_sites": self.point.n_sites,
            "j_star": self.point.j_label,
            "defect": defect_summary(self.point.chain),
            "dps": self.dps,
            "escalated": self.escalated,
            "zero_modes": self.zero_modes,
            "parity": self.parity,
            "parity_fixed": self.parity_fixed,
            "status": "failed" if self.error else "ok",
            "error": self.error,
        }


class _Recorder:
    """Builds rows for one point and times each observable."""

    def __init__(self, point: SweepPoint, ctx: PrecisionContext) -> None:
        self.point = point
        self.ctx = ctx
        self.records: dict[str, list[SweepRecord]] = {}

    def base(self, observable: str, subsystem_length: int | None = None) -> dict[str, Any]:
        return {
            "n_sites": self.point.n_sites,
            "subsystem_length": subsystem_length or self.point.measured.length,
            "defect": defect_summary(self.point.chain),
            "j_star": self.point.j_label,
            "observable": observable,
            "dps": self.ctx.decimal_digits,
        }

    def value(
        self,
        observable: str,
        value: Number,
        *,
        label: str = "",
        position: str = "",
        bits: bool = False,
        subsystem_length: int | None = None,
    ) -> SweepRecord:
        ctx = self.ctx
        return SweepRecord(
            **self.base(observable, subsystem_length),
            label=label,
            position=position,
            value=ctx.to_decimal_string(value),
            value_bits=ctx.to_decimal_string(to_bits(value, ctx)) if bits else "",
        )

    def add(self, observable: str, rows: list[SweepRecord], started: float) -> None:
        elapsed = round((time.perf_counter() - started) * 1000)
        self.records[observable] = [
            row.model_copy(update={"wall_time_ms": elapsed}) for row in rows
        ]


def evaluate_point(
    config: ExperimentConfig, point: SweepPoint, ctx: PrecisionContext
) -> PointResult:
    """Every configured observable at one sweep point and one precision."""
    wanted = config.ordered_observables()
    result = PointResult(point, ctx.decimal_digits)
    rec = _Recorder(point, ctx)
    n = point.n_sites

    gamma: CovarianceMatrix | None = None
    gamma_a: CovarianceMatrix | None = None
    if _STATE_OBSERVABLES.intersection(wanted):
        gamma = chain_ground_state(point.chain, ctx)
        result.zero_modes, result.parity = gamma.zero_modes, gamma.parity
        result.parity_fixed = gamma.parity_fixed
        gamma_a = restrict(gamma, point.measured)
    w = None
    if _HAMILTONIAN_OBSERVABLES.intersection(wanted):
        w = entanglement_hamiltonian(gamma_a, ctx)

    for name in wanted:
        started = time.perf_counter()
        if name == "k_matrix":
            result.k_matrix = w
            rows = matrix_records(w, ctx, rec.base(name))
        elif name in ("nn_profile", "symmetric_hopping"):
            profile = nn_profile(w) if name == "nn_profile" else symmetric_hopping(w)
            rows = [
                rec.value(name, p.value, label=p.kind, position=str(p.position))
                for p in profile.points
            ]
        elif name == "entropy":
            rows = [rec.value(name, entropy(gamma_a, ctx), bits=True)]
        elif name == "renyi":
            value = renyi_entropy(gamma_a, config.renyi_alpha, ctx)
            rows = [rec.value(name, value, label=f"alpha={config.renyi_alpha}", bits=True)]
        elif name == "entropy_profile":
            rows = []
            for length in config.lengths:
                value = _entropy_at(point, length, gamma, ctx)
                rows.append(
                    rec.value(
                        name, value, position=str(length), bits=True, subsystem_length=length
                    )
                )
        elif name == "spectrum":
            rows = _spectrum_rows(rec, gamma_a, config.spectrum_count)
        elif name == "negativity":
            cut = BipartitionSpec(cut=config.negativity_cut)
            rows = [rec.value(name, log_negativity(gamma_a, cut, ctx), label=f"cut={cut.cut}")]
        elif name == "fidelity":
            partner = build_point_chain(config, n, config.fidelity_partner_j_star, point.region)
            partner_a = restrict(chain_ground_state(partner, ctx), point.measured)
            value = fidelity(gamma_a, partner_a, ctx)
            rows = [rec.value(name, value, label=f"partner={config.fidelity_partner_j_star}")]
        elif name == "c_eff":
            rows = [rec.value(name, c_eff(point.j_star, ctx))]
        elif name == "scaling_fit":
            lengths = config.lengths or [point.measured.length]
            result.samples = [(n, ell, _entropy_at(point, ell, gamma, ctx)) for ell in lengths]
            continue
        rec.add(name, rows, started)

    result.records = rec.records
    return result


def _entropy_at(
    point: SweepPoint, length: int, gamma: CovarianceMatrix, ctx: PrecisionContext
) -> Number:
    """Entropy of the first ``length`` sites of the measured subsystem."""
    region = SubsystemSpec(start=point.measured.start, length=length)
    return entropy(restrict(gamma, region), ctx)


def _spectrum_rows(rec: _Recorder, gamma_a: CovarianceMatrix, count: int) -> list[SweepRecord]:
    spectrum = single_particle_spectrum(gamma_a, rec.ctx)
    rows = [
        rec.value("spectrum", eps, label="single_particle", position=str(k))
        for k, eps in enumerate(reversed(spectrum.eps))
    ]
    levels = many_body_spectrum(spectrum.finite_eps(), count)
    rows += [
        rec.value("spectrum", level, label="many_body", position=str(k))
        for k, level in enumerate(levels)
    ]
    return rows


def evaluate_with_retry(config: ExperimentConfig, point: SweepPoint) -> PointResult:
    """One attempt at ceil(ratio * N) digits, one retry at 2N after an escalation."""
    ctx = PrecisionContext.for_system_size(point.n_sites, config.precision_ratio)
    logger.info(
        "N=%d J*=%s: %d digits", point.n_sites, point.j_label or "-", ctx.decimal_digits
    )
    try:
        return evaluate_point(config, point, ctx)
    except PrecisionEscalationError as exc:
        retry_digits = max(2 * point.n_sites, MIN_DIGITS)
        if retry_digits <= ctx.decimal_digits:
            return _failed(point, ctx.decimal_digits, exc)
        logger.warning(
            "N=%d J*=%s: %s; retrying at %d digits",
            point.n_sites, point.j_label or "-", exc, retry_digits,
        )
        retry_ctx = PrecisionContext(retry_digits)
        try:
            result = evaluate_point(config, point, retry_ctx)
        except _NUMERIC_FAILURES as retry_exc:
            return _failed(point, retry_digits, retry_exc, escalated=True)
        result.escalated = True
        return result
    except (NonConvergenceError, SingularMatrixError) as exc:
        return _failed(point, ctx.decimal_digits, exc)


def _failed(point: SweepPoint, dps: int, exc: Exception, escalated: bool = False) -> PointResult:
    logger.error("N=%d J*=%s failed at %d digits: %s", point.n_sites, point.j_label, dps, exc)
    return PointResult(point, dps, escalated=escalated, error=str(exc))


def scaling_fit_records(
    config: ExperimentConfig, results: list[PointResult]
) -> list[SweepRecord]:
    """One slope/intercept/residual triple per J*, over every (N, L) sample of that J*.

    Aggregated rows carry N = L = 0 and the largest dps among their points.
    """
    groups: dict[str, list[PointResult]] = {}
    for result in results:
        if result.error is None:
            groups.setdefault(result.point.j_label, []).append(result)
    rows = []
    for j_label, members in groups.items():
        samples = [s for r in members for s in r.samples]
        ctx = PrecisionContext(max(r.dps for r in members))
        try:
            fit = fit_entropy_scaling(samples, ctx)
        except SpecError as exc:
            logger.warning("scaling fit for J*=%s skipped: %s", j_label or "-", exc)
            continue
        defect = config.defect_kind if config.defect_kind != "none" else "uniform"
        for label, value in (
            ("slope", fit.slope), ("intercept", fit.intercept), ("residual", fit.residual)
        ):
            rows.append(
                SweepRecord(
                    n_sites=0,
                    subsystem_length=0,
                    defect=defect,
                    j_star=j_label,
                    observable="scaling_fit",
                    label=label,
                    value=ctx.to_decimal_string(value),
                    dps=ctx.decimal_digits,
                )
            )
    return rows


# ─── Runs ────────────────────────────────────────────────────────────────────


@dataclass
class RunResult:
    exit_code: int
    files: list[Path]
    results: list[PointResult]
    failures: list[str]


def run(
    config: ExperimentConfig,
    *,
    settings: RuntimeSettings | None = None,
    on_point: Callable[[PointResult], None] | None = None,
) -> RunResult:
    """Evaluate every sweep point and write one CSV per observable plus the run manifests."""
    settings = settings or RuntimeSettings.from_env()
    points = plan_sweep(config)
    workers = max(1, min(settings.max_threads, len(points)))
    logger.info("run: %d sweep point(s) on %d thread(s)", len(points), workers)

    results: list[PointResult | None] = [None] * len(points)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(evaluate_with_retry, config, p): p.index for p in points}
        for future, index in futures.items():
            results[index] = future.result()
            if on_point is not None:
                on_point(results[index])
    done = [r for r in results if r is not None]

    by_observable: dict[str, list[SweepRecord]] = {}
    for name in config.ordered_observables():
        if name == "scaling_fit":
            by_observable[name] = scaling_fit_records(config, done)
        else:
            by_observable[name] = [row for r in done for row in r.records.get(name, [])]

    out = config.output_dir
    files = [write_records(out / f"{name}.csv", rows) for name, rows in by_observable.items()]
    for r in done:
        if r.k_matrix is not None:
            path = out / "k_matrix" / matrix_file_name(r.point)
            files.append(write_matrix(path, r.k_matrix, PrecisionContext(r.dps)))
    failures = [f"N={r.point.n_sites} J*={r.point.j_label}: {r.error}" for r in done if r.error]
    manifest = build_manifest(config, done, files, failures)
    files += write_manifest(out, manifest)
    exit_code = EXIT_PRECISION if failures else EXIT_OK
    return RunResult(exit_code, files, done, failures)


def matrix_file_name(point: SweepPoint) -> str:
    """``N<n>.csv`` or ``N<n>_J<j_star>.csv`` for the entanglement Hamiltonian of a point."""
    suffix = f"_J{point.j_label}" if point.j_label else ""
    return f"N{point.n_sites}{suffix}.csv"


def package_versions() -> dict[str, str]:
    versions = {"defectbench": __version__, "python": platform.python_version()}
    for name in ("mpmath", "numpy", "scipy", "pydantic"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def build_manifest(
    config: ExperimentConfig,
    results: list[PointResult],
    files: list[Path],
    failures: list[str],
) -> dict[str, Any]:
    sign = config.boundary_sign
    return {
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "status": "partial" if failures else "complete",
        "config": config.model_dump(mode="json"),
        "versions": package_versions(),
        "sector": {
            "fermion_boundary_sign": sign,
            "spin_parity": -sign,
            "rule": "ground state taken in the spin parity sector P = -fermion_boundary_sign",
        },
        "zero_modes": (
            "Schur values below 10^-(dps/2) are zero modes; they are filled in the Schur "
            "orientation and the last one is flipped when the parity sector requires it"
        ),
        "points": [r.summary() for r in results],
        "files": [f.relative_to(config.output_dir).as_posix() for f in files],
        "failures": failures,
    }


# ─── Oracle comparison ───────────────────────────────────────────────────────


@dataclass
class OracleComparison:
    n_sites: int
    j_star: str
    deviations: dict[str, float]
    degeneracy: int

    @property
    def worst(self) -> float:
        return max(self.deviations.values())


@dataclass
class OracleReport:
    comparisons: list[OracleComparison]
    tolerance: float = ORACLE_TOLERANCE

    @property
    def passed(self) -> bool:
        return all(c.worst <= self.tolerance for c in self.comparisons)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_ORACLE_MISMATCH

    def max_deviations(self) -> dict[str, float]:
        worst: dict[str, float] = {}
        for comparison in self.comparisons:
            for name, value in comparison.deviations.items():
                worst[name] = max(worst.get(name, 0.0), value)
        return worst

    def render(self) -> str:
        return render("oracle_report.md.j2", {"report": self})


def _max_deviation(a: Any, b: Any) -> float:
    return max((float(abs(x - y)) for x, y in zip(a, b)), default=0.0)


def compare_point(config: ExperimentConfig, point: SweepPoint) -> OracleComparison:
    """Gaussian pipeline against spin ED for one chain."""
    ctx = PrecisionContext.for_system_size(point.n_sites, config.precision_ratio)
    s = majorana_hamiltonian(point.chain, ctx)
    gamma = chain_ground_state(point.chain, ctx)
    gamma_a = restrict(gamma, point.measured)
    spectrum = single_particle_spectrum(gamma_a, ctx)
    levels = many_body_spectrum(spectrum.finite_eps(), config.spectrum_count)

    manifold = spin_ed_ground(point.chain, sector=-point.chain.fermion_boundary_sign)
    ground = align_with_covariance(manifold, gamma)
    if manifold.degeneracy > 1:
        logger.info(
            "N=%d J*=%s: %d-fold ground manifold; comparing the state matching the Gaussian",
            point.n_sites, point.j_label or "-", manifold.degeneracy,
        )
    ed_ctx = oracle_context()
    ed_gamma = covariance_from_state(ground)
    weights = rdm_spectrum(ground, point.measured)
    mp = ed_ctx.mp
    ed_entropy = -sum((w * mp.log(w) for w in weights if w > 0), mp.zero)
    positive = [w for w in weights if w > mp.mpf(10) ** -(ed_ctx.decimal_digits // 2)]
    ed_levels = [mp.log(positive[0] / w) for w in positive][: len(levels)]

    deviations = {
        "energy": float(abs(state_energy(s, gamma, ctx) - manifold.energy)),
        "covariance": _max_deviation(gamma.gamma.entries.flat, ed_gamma.gamma.entries.flat),
        "entropy": float(abs(entropy(gamma_a, ctx) - ed_entropy)),
        "spectrum": _max_deviation(levels[: len(ed_levels)], ed_levels),
    }
    return OracleComparison(point.n_sites, point.j_label, deviations, manifold.degeneracy)


def oracle_check(config: ExperimentConfig) -> OracleReport:
    """Compare every sweep point with exact diagonalization; N above 12 is out of range."""
    too_large = sorted({n for n in config.n_sites if n > ORACLE_MAX_SITES})
    if too_large:
        raise OracleRangeError(
            f"oracle check is limited to N <= {ORACLE_MAX_SITES}, got {too_large}"
        )
    report = OracleReport([compare_point(config, p) for p in plan_sweep(config)])
    for name, value in report.max_deviations().items():
        logger.info("oracle: max %s deviation %.3e", name, value)
    return report
