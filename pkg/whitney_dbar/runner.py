"""
Experiment runner.

An experiment expands its config into independent cases. Cases run
concurrently in worker threads; their artifacts are collected in case order
and written only after every case succeeded, followed by the manifest.
"""

import asyncio
from collections.abc import Callable
from dataclasses import dataclass
from importlib import resources
import json
import logging
from pathlib import Path
import re
from typing import Final

import numpy as np
from pydantic import ValidationError

from . import _kernels
from .cauchy import dbar_correction, holo_approx, inversion_study, max_principle_check
from .commutator import build_kernel, diagonal_profile, regularity_verdict
from .exceptions import (
    ConfigError,
    InvalidInputError,
    NotComplexLinearOnComplexPart,
    NumericalContractError,
    WhitneyDbarError,
)
from .functions import WirtingerFunction, bump, exp, polynomial, resolve
from .grid import Grid
from .jets import (
    Jet1,
    determinacy_scan,
    holder_fit,
    locally_constant_jet,
    restrict_smooth,
    snowflake_flat_approx,
    snowflake_zero_diff_jet,
    whitney_modulus,
)
from .perimeter import pair
from .plane_sets import (
    Region,
    SetSample,
    SnowflakeCurve,
    box_counting_dimension,
    circle_sample,
    grid_sample,
    ifs_sample,
    load_set_spec,
    region_make,
    snowflake_sample,
)
from .schemas.base import RecordBaseModel, TableBaseModel
from .schemas.config import ExperimentConfig, FunctionSymbol
from .schemas.manifest import Manifest
from .schemas.reports import (
    ApproxError,
    ApproxErrorTable,
    ApproxTable,
    CorrectionTable,
    ExtensionRow,
    ExtensionTable,
    HolderFitReport,
    MaxPrincipleTable,
    ModulusTable,
    PairingTable,
)
from .schemas.sets import NAMED_IFS
from .settings import get_settings
from .utils import sha256_hex, write_artifacts, write_manifest
from .wirtinger import RealSubspace, extend_complex_linear, is_totally_real


logger = logging.getLogger(__name__)

Artifacts = dict[str, bytes]


@dataclass(frozen=True)
class Case:
    name: str
    compute: Callable[[], Artifacts]


@dataclass(frozen=True)
class Experiment:
    description: str
    build: Callable[[ExperimentConfig], list[Case]]


###############
### Helpers ###
###############


def slug(text: str) -> str:
    return re.sub(r"[^0-9A-Za-z]+", "-", text).strip("-").lower()


def csv_bytes(table: TableBaseModel) -> bytes:
    frame = table.to_frame()
    numeric = frame.select_dtypes(include="number").to_numpy(dtype=float)
    if np.isinf(numeric).any():
        raise NumericalContractError(f"{type(table).__name__} holds infinite values")
    return table.to_csv().encode()


def function_for(config: ExperimentConfig, symbol: FunctionSymbol) -> WirtingerFunction:
    if symbol is FunctionSymbol.BUMP:
        return bump(config.bump.radius, complex(*config.bump.center))
    if symbol is FunctionSymbol.POLYNOMIAL:
        return polynomial([complex(*c) for c in config.coefficients or ()])
    return resolve(symbol.value)


def curve_for(config: ExperimentConfig) -> SnowflakeCurve:
    return snowflake_sample(config.sample.beta, config.sample.depth)


def sample_for(config: ExperimentConfig) -> SetSample:
    spec = config.sample
    match spec.kind:
        case "ifs":
            return ifs_sample(NAMED_IFS[spec.ifs](), spec.depth)
        case "snowflake":
            return curve_for(config).to_sample()
        case "circle":
            return circle_sample(spec.n, spec.radius)
        case "grid":
            return grid_sample(spec.n, spec.spacing)
        case _:
            return load_set_spec(spec.path)


def grid_for(config: ExperimentConfig) -> Grid:
    spec = config.grid
    return Grid(
        corner=complex(*spec.corner),
        width=spec.nx * spec.h,
        height=spec.ny * spec.h,
        h=spec.h,
    )


def region_for(config: ExperimentConfig) -> Region:
    spec = config.region
    return region_make(
        spec.kind,
        center=complex(*spec.center),
        radius=spec.radius,
        corner=complex(*spec.corner),
        side=spec.side,
        vertices=[complex(*v) for v in spec.vertices] if spec.vertices else None,
    )


def json_bytes(record: RecordBaseModel) -> bytes:
    return (record.model_dump_json(indent=2) + "\n").encode()


def jet_bytes(jet: Jet1) -> bytes:
    return (json.dumps(jet.to_json_dict(), indent=2) + "\n").encode()


def modulus_for(jet: Jet1, scales: list[float]) -> ModulusTable:
    # full scans need no candidate lists; use them whenever they fit the budget
    n = len(jet)
    return whitney_modulus(jet, scales, accelerate=n * (n - 1) > get_settings().pair_budget)


###################
### Experiments ###
###################


def _holo_approx(config: ExperimentConfig) -> list[Case]:
    sample, grid = sample_for(config), grid_for(config)

    def compute(symbol: FunctionSymbol) -> Artifacts:
        func = function_for(config, symbol)
        reports, artifacts = [], {}
        for k, delta in enumerate(config.deltas):
            transform, report = holo_approx(
                func, sample, delta, grid, config.dbar_source, config.method
            )
            reports.append(report)
            if config.dump_grids:
                artifacts[f"holo-approx_{slug(symbol)}_delta{k}.bin"] = transform.to_bytes()
        artifacts[f"holo-approx_{slug(symbol)}.csv"] = csv_bytes(ApproxTable(rows=reports))
        return artifacts

    return [Case(f"holo-approx {s}", lambda s=s: compute(s)) for s in config.functions]


def _perimeter(config: ExperimentConfig) -> list[Case]:
    region, grid = region_for(config), grid_for(config)
    phi = bump(config.bump.radius, complex(*config.bump.center))

    def compute(symbol: FunctionSymbol) -> Artifacts:
        func = function_for(config, symbol)
        rows = []
        for r in range(config.refinements + 1):
            fine = grid.refine(2**r)
            fine.check_budget()
            case = func.name if r == 0 else f"{func.name} h={fine.h:.6g}"
            rows.append(pair(func, phi, region, fine, case=case))
        return {f"perimeter_{slug(symbol)}.csv": csv_bytes(PairingTable(rows=rows))}

    return [Case(f"perimeter {s}", lambda s=s: compute(s)) for s in config.functions]


def _commutator_scan(config: ExperimentConfig) -> list[Case]:
    sample = sample_for(config)
    curve = curve_for(config) if config.sample.kind == "snowflake" else None

    def compute(symbol: FunctionSymbol) -> Artifacts:
        if symbol is FunctionSymbol.KOCH_PARAMETER:
            kernel = build_kernel(snowflake_zero_diff_jet(curve), seed=config.seed)
        else:
            kernel = build_kernel(function_for(config, symbol), sample, seed=config.seed)
        profile = diagonal_profile(kernel, config.scales)
        verdict = regularity_verdict(profile).model_copy(update={"case": symbol.value})
        name = f"commutator-scan_{slug(symbol)}"
        artifacts = {
            f"{name}_profile.csv": csv_bytes(profile),
            f"{name}_verdict.json": json_bytes(verdict),
        }
        if config.dump_grids:
            artifacts[f"{name}_kernel.bin"] = kernel.to_bytes()
        return artifacts

    return [Case(f"commutator-scan {s}", lambda s=s: compute(s)) for s in config.functions]


def _snowflake_jet(config: ExperimentConfig) -> list[Case]:
    curve = curve_for(config)
    dimension = box_counting_dimension(curve.points, config.scales)

    def compute(symbol: FunctionSymbol) -> Artifacts:
        name = f"snowflake-jet_{slug(symbol)}"
        artifacts: Artifacts = {}
        if symbol is FunctionSymbol.KOCH_PARAMETER:
            jet = snowflake_zero_diff_jet(curve)
            expected = 1.0 / curve.alpha - 1.0
            endpoints = (complex(jet.values[0]), complex(jet.values[-1]))
        else:
            func = function_for(config, symbol)
            jet = restrict_smooth(func, curve.to_sample())
            expected, endpoints = None, None
            if config.levels:
                flat = [snowflake_flat_approx(curve, func, level) for level in config.levels]
                table = ApproxErrorTable(
                    rows=[
                        ApproxError(
                            level=a.level,
                            uniform_error=a.uniform_error,
                            cell_diameter=a.cell_diameter,
                        )
                        for a in flat
                    ]
                )
                artifacts[f"{name}_flat.csv"] = csv_bytes(table)

        modulus = modulus_for(jet, config.scales)
        exponent, constant = holder_fit(modulus)
        fit = HolderFitReport(
            case=symbol.value,
            exponent=exponent,
            constant=constant,
            expected_exponent=expected,
            box_dimension=dimension,
            endpoint_values=endpoints,
        )
        artifacts[f"{name}_modulus.csv"] = csv_bytes(modulus)
        artifacts[f"{name}_fit.json"] = json_bytes(fit)
        if config.dump_grids:
            artifacts[f"{name}_jet.json"] = jet_bytes(jet)
        return artifacts

    return [Case(f"snowflake-jet {s}", lambda s=s: compute(s)) for s in config.functions]


def _whitney_determinacy(config: ExperimentConfig) -> list[Case]:
    sample = sample_for(config)

    def compute(symbol: FunctionSymbol) -> Artifacts:
        jet = restrict_smooth(function_for(config, symbol), sample)
        modulus = modulus_for(jet, config.scales)
        scan = determinacy_scan(jet, config.scales[-1])
        name = f"whitney-determinacy_{slug(symbol)}"
        artifacts = {
            f"{name}_modulus.csv": csv_bytes(modulus),
            f"{name}_determinacy.csv": csv_bytes(scan),
        }
        if config.dump_grids:
            artifacts[f"{name}_jet.json"] = jet_bytes(jet)
        return artifacts

    return [Case(f"whitney-determinacy {s}", lambda s=s: compute(s)) for s in config.functions]


def _extend_linear(config: ExperimentConfig) -> list[Case]:
    def compute() -> Artifacts:
        rng = np.random.default_rng(config.seed)
        n = config.dimension
        rows = []
        for trial in range(config.trials):
            k = int(rng.integers(1, n + 1))
            basis = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
            values = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            subspace = RealSubspace(n=n, basis=basis)
            if not is_totally_real(subspace):
                rows.append(ExtensionRow(trial=trial, n=n, dim=k, accepted=False))
                continue
            extension = extend_complex_linear(subspace, values)
            oracle = np.linalg.lstsq(basis, values, rcond=None)[0]
            rows.append(
                ExtensionRow(
                    trial=trial,
                    n=n,
                    dim=k,
                    accepted=True,
                    restriction_error=float(np.abs(extension(basis) - values).max()),
                    oracle_gap=float(np.abs(extension.holo - oracle).max()),
                )
            )
        # conjugation on C^1 is real-linear but not complex-linear on C ∩ iC = C
        try:
            extend_complex_linear(RealSubspace(n=1, basis=[1, 1j]), np.array([1, -1j]))
            rejected = False
        except NotComplexLinearOnComplexPart:
            rejected = True
        if not rejected:
            raise NumericalContractError("conjugation on C^1 was accepted as complex-linear")
        rows.append(ExtensionRow(trial=config.trials, n=1, dim=2, accepted=False))
        return {"extend-linear.csv": csv_bytes(ExtensionTable(rows=rows))}

    return [Case("extend-linear", compute)]


def _locally_constant(config: ExperimentConfig) -> list[Case]:
    sample = sample_for(config)

    def compute(symbol: FunctionSymbol) -> Artifacts:
        func = function_for(config, symbol)
        rows = []
        for level in config.levels:
            approx = locally_constant_jet(sample, func, level)
            rows.append(
                ApproxError(
                    level=level,
                    uniform_error=approx.uniform_error,
                    cell_diameter=approx.cell_diameter,
                )
            )
        return {f"locally-constant_{slug(symbol)}.csv": csv_bytes(ApproxErrorTable(rows=rows))}

    return [Case(f"locally-constant {s}", lambda s=s: compute(s)) for s in config.functions]


def _max_principle(config: ExperimentConfig) -> list[Case]:
    region = region_for(config)

    def compute() -> Artifacts:
        rng = np.random.default_rng(config.seed)
        candidates: list[WirtingerFunction] = [polynomial([0, 0, 0, 0, 0, 1], name="z^5"), exp()]
        for trial in range(config.trials):
            degree = int(rng.integers(0, 9))
            coeffs = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
            candidates.append(polynomial(coeffs.tolist(), name=f"random-{trial}-deg{degree}"))
        rows = [
            max_principle_check(u, region).model_copy(update={"case": u.name})
            for u in candidates
        ]
        if config.grid is not None:
            grid = grid_for(config)
            # non-holomorphic control, evaluated on grid nodes
            control = max_principle_check(grid.sample(lambda z: np.abs(z) ** 2), region)
            rows.append(control.model_copy(update={"case": "|z|^2 grid"}))
        return {"max-principle.csv": csv_bytes(MaxPrincipleTable(rows=rows))}

    return [Case("max-principle", compute)]


def _cauchy_inversion(config: ExperimentConfig) -> list[Case]:
    grid = grid_for(config)
    grid.refine(2**config.refinements).check_budget()

    def compute(symbol: FunctionSymbol) -> Artifacts:
        func = function_for(config, symbol)
        table = inversion_study(func, grid, config.refinements, config.method)
        return {f"cauchy-inversion_{slug(symbol)}.csv": csv_bytes(table)}

    return [Case(f"cauchy-inversion {s}", lambda s=s: compute(s)) for s in config.functions]


def _dbar_correction(config: ExperimentConfig) -> list[Case]:
    grid = grid_for(config)
    b, holomorphic = (function_for(config, s) for s in config.functions)

    def compute() -> Artifacts:
        rows = []
        for r in range(config.refinements + 1):
            fine = grid.refine(2**r)
            fine.check_budget()
            _, report = dbar_correction(b, holomorphic, fine)
            rows.append(report.model_copy(update={"case": f"{b.name} * {holomorphic.name}"}))
        return {"dbar-correction.csv": csv_bytes(CorrectionTable(rows=rows))}

    return [Case("dbar-correction", compute)]


EXPERIMENTS: Final[dict[str, Experiment]] = {
    "cauchy-inversion": Experiment(
        "dbar of the grid Cauchy transform against its source under refinement",
        _cauchy_inversion,
    ),
    "commutator-scan": Experiment(
        "diagonal profile and regularity verdict of (b(z) - b(w)) / (z - w)",
        _commutator_scan,
    ),
    "dbar-correction": Experiment(
        "whole-plane correction u = C[h dbar b] making b h - u holomorphic",
        _dbar_correction,
    ),
    "extend-linear": Experiment(
        "complex-linear extension off random totally-real subspaces",
        _extend_linear,
    ),
    "holo-approx": Experiment(
        "truncated Cauchy integral approximation on a compact set over shrinking delta",
        _holo_approx,
    ),
    "locally-constant": Experiment(
        "uniform error of cellwise constant approximation on a Cantor set",
        _locally_constant,
    ),
    "max-principle": Experiment(
        "boundary against interior maxima of holomorphic polynomials",
        _max_principle,
    ),
    "perimeter": Experiment(
        "dbar(f 1_E) against f dbar 1_E on a finite-perimeter region",
        _perimeter,
    ),
    "snowflake-jet": Experiment(
        "Whitney modulus of jets on a snowflake curve and its Holder fit",
        _snowflake_jet,
    ),
    "whitney-determinacy": Experiment(
        "Whitney modulus and differentials fitted from values alone",
        _whitney_determinacy,
    ),
}


###############
### Running ###
###############


def shipped_config(name: str) -> Path:
    """Path of the default config shipped for an experiment."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"Unknown experiment {name!r}")
    return Path(str(resources.files("whitney_dbar") / "configs" / f"{name}.json"))


def load_config(path: Path) -> ExperimentConfig:
    """
    Raises:
        ConfigError: unreadable file
        ValidationError: invalid config
    """
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config '{path}': {e}") from e
    config = ExperimentConfig.model_validate_json(text)
    if config.sample is not None and config.sample.path is not None:
        resolved = (path.parent / config.sample.path).resolve()
        config = config.model_copy(
            update={"sample": config.sample.model_copy(update={"path": resolved})}
        )
    return config


def with_set_spec(config: ExperimentConfig, path: Path) -> ExperimentConfig:
    """
    Config whose set is the SetSample document at ``path``.

    Raises:
        InvalidInputError: unreadable or invalid document
        ValidationError: the experiment cannot take a file set
    """
    load_set_spec(path)
    data = config.model_dump(by_alias=True)
    data["set"] = {"kind": "file", "path": path.resolve()}
    logger.info("Set replaced by '%s'", path)
    return ExperimentConfig.model_validate(data)


def _guarded(case: Case) -> Artifacts:
    try:
        artifacts = case.compute()
    except WhitneyDbarError:
        raise
    except ValidationError as e:
        logger.error("Case '%s' rejected a domain value", case.name)
        raise InvalidInputError(f"{case.name}: {e}") from e
    except FloatingPointError as e:
        raise NumericalContractError(f"{case.name}: {e}") from e
    logger.info("Case '%s' done: %d artifacts", case.name, len(artifacts))
    return artifacts


async def _run_cases(cases: list[Case], threads: int) -> list[Artifacts]:
    semaphore = asyncio.Semaphore(threads)

    async def run_one(case: Case) -> Artifacts:
        async with semaphore:
            logger.debug("Starting case '%s'", case.name)
            return await asyncio.to_thread(_guarded, case)

    return await asyncio.gather(*(run_one(case) for case in cases))


async def arun(
    config: ExperimentConfig,
    threads: int | None = None,
    out_dir: Path | None = None,
) -> Manifest:
    """
    Run one experiment and write its artifacts plus ``manifest.json``.

    Raises:
        WhitneyDbarError: any library error; nothing is written in that case
    """
    threads = threads or get_settings().threads or 1
    _kernels.set_threads(threads)
    out_dir = out_dir or config.output_dir
    logger.info("Running '%s' (seed %d, %d threads)", config.experiment, config.seed, threads)

    cases = EXPERIMENTS[config.experiment].build(config)
    results = await _run_cases(cases, threads)

    artifacts: Artifacts = {}
    for case, produced in zip(cases, results, strict=True):
        clash = artifacts.keys() & produced.keys()
        if clash:
            raise InvalidInputError(f"case '{case.name}' rewrites {sorted(clash)}")
        artifacts.update(produced)

    entries = write_artifacts(out_dir, artifacts)
    manifest = Manifest(
        experiment=config.experiment,
        seed=config.seed,
        config_sha256=sha256_hex(
            config.model_dump_json(by_alias=True, exclude={"output_dir"}).encode()
        ),
        files=entries,
    )
    write_manifest(out_dir, manifest)
    return manifest


def run(
    config: ExperimentConfig,
    threads: int | None = None,
    out_dir: Path | None = None,
) -> Manifest:
    return asyncio.run(arun(config, threads=threads, out_dir=out_dir))


def list_catalog() -> str:
    """Experiments, set kinds and function symbols, each sorted."""
    width = max(map(len, EXPERIMENTS))
    lines = ["experiments:"]
    lines += [f"  {name:<{width}}  {EXPERIMENTS[name].description}" for name in sorted(EXPERIMENTS)]
    lines.append("sets:")
    set_kinds = {"circle", "file", "grid", "snowflake"} | {f"ifs:{name}" for name in NAMED_IFS}
    lines += [f"  {kind}" for kind in sorted(set_kinds)]
    lines.append("functions:")
    lines += [f"  {symbol}" for symbol in sorted(s.value for s in FunctionSymbol)]
    return "\n".join(lines) + "\n"

