"""
Command-Line Interface
Batch forward / inverse / curvature / verification pipelines with JSON, CSV and SVG output

    python -m app.cli forward profile.json --out out/cylinder --modes 10
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.core.config import settings
from app.core.exceptions import ConvergenceFailure, ToolkitError
from app.core.logging import setup_logging
from app.models.grid import GridFunction
from app.models.inverse import EndpointAnchor, ForwardSetup, InverseConfig, SlopeAnchor
from app.models.spectral import SLProblem, SpectralData, make_boundary_condition
from app.models.surface import SurfaceProfile
from app.services import artifacts, geometry, inverse_solver, sl_solver, spectral_data

logger = logging.getLogger(__name__)

COMMANDS = (
    "forward",
    "inverse",
    "curvature-map",
    "curvature-invert",
    "transform",
    "verify-b",
    "embed",
    "roundtrip",
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONVERGENCE = 2


class CommandSpec(BaseModel):
    """One CLI invocation: command, input file, output stem and flags"""

    model_config = ConfigDict(frozen=True)

    command: Literal[
        "forward",
        "inverse",
        "curvature-map",
        "curvature-invert",
        "transform",
        "verify-b",
        "embed",
        "roundtrip",
    ]
    input_path: Path
    output_path: Path
    grid: int = Field(default_factory=lambda: settings.GRID_N, ge=8)
    modes: int = Field(default_factory=lambda: settings.INVERSE_N_MODES, ge=1)
    bc: Literal["dirichlet", "mixed", "robin"] = "dirichlet"
    a: float = 0.0
    b: float = 0.0
    q0: float = 0.0
    E: float = Field(default=0.0, ge=0)
    m: int = Field(default=1, ge=1)
    tol: Optional[float] = Field(default=None, gt=0)
    r0: float = Field(default=1.0, gt=0)
    r1: Optional[float] = Field(default=None, gt=0)
    symmetric: bool = False
    noise: float = Field(default=0.0, ge=0)
    seed: int = 0
    terms: Optional[int] = Field(default=None, ge=0)

    @field_validator("input_path", "output_path")
    @classmethod
    def _nonempty(cls, value: Path) -> Path:
        if not str(value).strip() or str(value) == ".":
            raise ValueError("path must not be empty")
        return value

    @property
    def boundary(self):
        return make_boundary_condition(self.bc, self.a, self.b)

    @property
    def paths(self) -> Dict[str, Path]:
        return artifacts.output_paths(self.output_path)

    def setup(self) -> ForwardSetup:
        return ForwardSetup(q0=self.q0, E=self.E, m=self.m, r0=self.r0, bc=self.boundary)

    def inverse_config(self) -> InverseConfig:
        fields = {
            "n_modes": self.modes,
            "grid_n": self.grid,
            "mode": "symmetric" if self.symmetric else "full",
        }
        if self.tol is not None:
            fields["tol"] = self.tol
        fields["basis_size"] = min(settings.INVERSE_BASIS_SIZE, 2 * self.modes)
        return InverseConfig(**fields)


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------

def _read(spec: CommandSpec, model):
    text = Path(spec.input_path).read_text()
    return model.model_validate_json(text)


def _read_grid(spec: CommandSpec) -> GridFunction:
    """A GridFunction, or an object holding one under "q", "xi" or "r"."""
    payload = json.loads(Path(spec.input_path).read_text())
    for key in ("q", "xi", "r"):
        if isinstance(payload, dict) and key in payload and isinstance(payload[key], dict):
            payload = payload[key]
            break
    return GridFunction.model_validate(payload)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _forward(spec: CommandSpec) -> None:
    profile = _read(spec, SurfaceProfile)
    data = spectral_data.forward(profile, spec.E, spec.boundary, spec.modes)
    paths = spec.paths
    artifacts.write_json(paths["json"], data)
    columns = {"index": data.indices, "mu": data.mu, "tilde_mu": data.tilde_mu}
    if data.has_norming:
        columns["norming_constant"] = data.norming
    artifacts.write_csv(paths["csv"], columns)
    artifacts.plot_spectrum(paths["svg"], data)
    print(f"mu: {', '.join(f'{mu:.10g}' for mu in data.mu[:5])}{' ...' if data.n_modes > 5 else ''}")
    print(f"c0 = {data.c0:.10g}")


def _inverse(spec: CommandSpec) -> None:
    target = _read(spec, SpectralData)
    if spec.bc != target.bc.kind:
        logger.info(f"using boundary condition {target.bc} from the input data")
    setup = ForwardSetup(q0=spec.q0, E=spec.E, m=spec.m, r0=spec.r0, bc=target.bc)
    q, report = inverse_solver.reconstruct_q(target, setup, spec.inverse_config())
    anchors = EndpointAnchor(r0=spec.r0, r1=spec.r1) if spec.r1 is not None else SlopeAnchor(r0=spec.r0, q0=spec.q0)
    profile, surface = inverse_solver.reconstruct_surface(q, anchors, spec.m)
    paths = spec.paths
    artifacts.write_json(paths["json"], profile)
    artifacts.write_json(paths["json"].with_name(f"{paths['json'].stem}.report.json"), report)
    r = geometry.radius_from_q(profile)
    artifacts.write_csv(paths["csv"], {"x": q.x, "q": q.values, "r": r.values})
    artifacts.plot_silhouette(paths["svg"], surface)
    print(f"iterations = {report.iterations}, residual = {report.final_residual:.3e}")


def _transform(spec: CommandSpec) -> None:
    profile = _read(spec, SurfaceProfile)
    form = sl_solver.to_schrodinger(SLProblem(profile=profile, E=spec.E, bc=spec.boundary))
    paths = spec.paths
    artifacts.write_json(paths["json"], form)
    artifacts.write_grid_csv(paths["csv"], form.p, "p")
    artifacts.plot_grid_function(paths["svg"], form.p, "p")
    print(f"c0 = {form.c0:.10g}, bc' = {form.bc}")


def _verify_b(spec: CommandSpec) -> None:
    data = _read(spec, SpectralData)
    n_terms = data.n_modes if spec.terms is None else spec.terms
    result = spectral_data.b_from_identity(data, n_terms)
    supplied = getattr(data.bc, "b", None)
    payload = {
        "estimate": result.estimate,
        "last_term": result.last_term,
        "n_terms": result.n_terms,
        "supplied_b": supplied,
        "difference": None if supplied is None else result.estimate - supplied,
    }
    artifacts.write_json(spec.paths["json"], payload)
    estimate = round(result.estimate, 6)
    if estimate == 0.0:
        estimate = 0.0  # prints 0.0, never -0.0
    print(estimate)


def _curvature_map(spec: CommandSpec) -> None:
    q = _read_grid(spec)
    result = geometry.curvature_map_G(q, spec.q0)
    paths = spec.paths
    artifacts.write_json(paths["json"], result)
    artifacts.write_grid_csv(paths["csv"], result.xi, "xi")
    artifacts.plot_grid_function(paths["svg"], result.xi, "xi")
    print(f"K0 = {result.K0:.10g}")


def _curvature_invert(spec: CommandSpec) -> None:
    xi = _read_grid(spec)
    q = geometry.curvature_invert(xi, spec.q0)
    K0 = geometry.curvature_map_G(q, spec.q0).K0
    paths = spec.paths
    artifacts.write_json(paths["json"], {"q": q.model_dump(by_alias=True), "K0": K0})
    artifacts.write_grid_csv(paths["csv"], q, "q")
    artifacts.plot_grid_function(paths["svg"], q, "q")
    print(f"K0 = {K0:.10g}")


def _embed(spec: CommandSpec) -> None:
    r = _read_grid(spec)
    surface = geometry.recover_embedding(r)
    paths = spec.paths
    artifacts.write_json(paths["json"], surface)
    artifacts.write_csv(paths["csv"], {"x": surface.f_samples.x, "f": surface.f_samples.values})
    artifacts.plot_silhouette(paths["svg"], surface)
    print(f"x0 = {surface.x0:.10g}")


def _roundtrip(spec: CommandSpec) -> None:
    q = _read_grid(spec)
    cfg = spec.inverse_config().model_copy(update={"grid_n": q.n_intervals})
    report = inverse_solver.roundtrip_report(q, spec.setup(), cfg, noise=spec.noise, seed=spec.seed)
    artifacts.write_json(spec.paths["json"], report)
    print(f"converged = {report.converged}, h0_error = {report.h0_error}")


HANDLERS: Dict[str, Callable[[CommandSpec], None]] = {
    "forward": _forward,
    "inverse": _inverse,
    "curvature-map": _curvature_map,
    "curvature-invert": _curvature_invert,
    "transform": _transform,
    "verify-b": _verify_b,
    "embed": _embed,
    "roundtrip": _roundtrip,
}


def run(spec: CommandSpec) -> int:
    """
    Execute one command.

    Returns:
        0 on success, 1 on validation errors, 2 on solver nonconvergence
    """
    logger.info(f"{spec.command}: {spec.input_path} -> {spec.output_path}")
    try:
        HANDLERS[spec.command](spec)
    except ConvergenceFailure as exc:
        logger.error(f"{spec.command} failed ({type(exc).__name__}): {exc}")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ToolkitError, ValidationError, ValueError, FileNotFoundError) as exc:
        logger.error(f"{spec.command} rejected ({type(exc).__name__}): {exc}")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfspec",
        description="Spectral data of Laplace-Beltrami operators on surfaces of revolution",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("input", help="Input JSON file")
    parser.add_argument("--out", required=True, help="Output stem (<stem>.json/.csv/.svg)")
    parser.add_argument("--grid", type=int, default=settings.GRID_N, help="Grid intervals")
    parser.add_argument("--modes", type=int, default=settings.INVERSE_N_MODES, help="Number of modes")
    parser.add_argument("--bc", choices=("dirichlet", "mixed", "robin"), default="dirichlet")
    parser.add_argument("--a", type=float, default=0.0, help="Robin constant at x = 0")
    parser.add_argument("--b", type=float, default=0.0, help="Mixed/Robin constant at x = 1")
    parser.add_argument("--q0", type=float, default=0.0)
    parser.add_argument("--E", type=float, default=0.0, help="Fiber eigenvalue")
    parser.add_argument("--m", type=int, default=1, help="Fiber dimension")
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--r0", type=float, default=1.0)
    parser.add_argument("--r1", type=float, default=None)
    parser.add_argument("--symmetric", action="store_true", help="Eigenvalues only, q odd about 1/2")
    parser.add_argument("--noise", type=float, default=0.0, help="Relative noise level (roundtrip)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--terms", type=int, default=None, help="Terms of the b-identity")
    parser.add_argument("--log-level", default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        spec = CommandSpec(
            command=args.command,
            input_path=args.input,
            output_path=args.out,
            grid=args.grid,
            modes=args.modes,
            bc=args.bc,
            a=args.a,
            b=args.b,
            q0=args.q0,
            E=args.E,
            m=args.m,
            tol=args.tol,
            r0=args.r0,
            r1=args.r1,
            symmetric=args.symmetric,
            noise=args.noise,
            seed=args.seed,
            terms=args.terms,
        )
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
