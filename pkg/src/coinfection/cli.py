"""Command line front end.

    coinfection reduce   --params P --out D
    coinfection classify --params P --out D
    coinfection simulate --params P --out D --system reduced --init 3,1 --horizon 20
    coinfection sweep    --params P --out D --axes delta,lambda --res 200,200
    coinfection validate --params P --out D --eps 1e-1,1e-2,1e-3

Every artifact is staged under a temporary name and renamed into place
only after the whole command has succeeded.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import dynamics, equilibria, sweep
from .integrator import IntegrationError
from .params import ConfigError, ParameterError, compute_thresholds, load_params, reduce

log = logging.getLogger("coinfection")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_INTEGRATION = 3


def _g(x) -> str:
    return "" if x is None else f"{x:.17g}"


def _floats(text: str, n: int | None = None, name: str = "value") -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(values) != n:
        raise argparse.ArgumentTypeError(f"{name}: expected {n} numbers, got {len(values)}")
    return values


def _pair(name):
    return lambda text: tuple(_floats(text, 2, name))


def _ints(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--res: expected n,m got {text!r}") from None
    return a, b


def _axes(text: str) -> tuple[str, str]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"--axes: expected x,y got {text!r}")
    return parts[0].strip(), parts[1].strip()


class Artifacts:
    """Collects (filename, writer) pairs and commits them all at once."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.pending: list[tuple[str, object]] = []

    def add(self, name: str, writer) -> None:
        self.pending.append((name, writer))

    def add_text(self, name: str, text: str) -> None:
        self.add(name, lambda path: Path(path).write_text(text))

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        staged = []
        try:
            for name, writer in self.pending:
                final = self.out_dir / name
                tmp = final.with_name(f".{name}.tmp{os.getpid()}")
                staged.append((tmp, final))
                writer(tmp)
        except BaseException:
            for tmp, _ in staged:
                tmp.unlink(missing_ok=True)
            raise
        for tmp, final in staged:
            os.replace(tmp, final)
        return [final for _, final in staged]


def _report(pairs) -> str:
    return "".join(f"{k} = {v}\n" for k, v in pairs)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_reduce(args, art: Artifacts) -> int:
    p = load_params(args.params)
    rp = reduce(p)
    th = compute_thresholds(rp)
    pairs = [
        ("nu_star", _g(rp.nu_star)),
        ("reduced_equals_primary", str(rp.nu_star == 0.0).lower()),
        ("a_bar", _g(rp.a_bar)),
        ("c_bar_SI", _g(rp.c_bar_SI)),
        ("c_bar_IS", _g(rp.c_bar_IS)),
        ("c_bar_II", _g(rp.c_bar_II)),
        ("beta_bar", _g(rp.beta_bar)),
        ("gamma_bar", _g(rp.gamma_bar)),
        ("mu_bar", _g(rp.mu_bar)),
        ("S1", _g(th.s1_star)),
        ("Abar", _g(th.a_bar_thr)),
        ("Bbar", _g(th.b_bar_thr)),
        ("R", _g(th.r_script)),
        ("invasion_margin", _g(th.invasion_margin)),
    ]
    text = _report(pairs)
    if rp.nu_star == 0.0:
        print("# reduced = primary submodel (opportunistic disease cannot invade)")
    art.add_text("reduced.txt", text)
    art.commit()
    sys.stdout.write(text)
    return EXIT_OK


def cmd_classify(args, art: Artifacts) -> int:
    p = load_params(args.params)
    sc = equilibria.classify(p)
    text = _report(equilibria.scenario_record(sc).items())
    art.add_text("scenario.txt", text)
    art.commit()
    print(sc.label.value)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args, art: Artifacts) -> int:
    p = load_params(args.params)
    if args.tol is not None:
        p_rtol, p_atol = args.tol
    else:
        p_rtol, p_atol = 1e-8, 1e-10
    if p_rtol <= 0 or p_atol <= 0:
        raise ParameterError("--tol values must be positive")
    if args.horizon <= 0:
        raise ParameterError("--horizon must be positive")
    init = _floats(args.init, name="--init")
    t_eval = np.linspace(0.0, args.horizon, args.samples) if args.samples else None
    sc = equilibria.classify(p)
    if args.system == "reduced":
        if len(init) != 2:
            raise ParameterError("--init for the reduced system is S,I")
        tr = dynamics.simulate_reduced(reduce(p), init, args.horizon, p_rtol, p_atol, t_eval=t_eval)
        end = tuple(tr.final)
        nearest, dist = equilibria.nearest_equilibrium(end, sc)
        where = nearest.location
    else:
        if len(init) != 3:
            raise ParameterError("--init for the complete system is S,U,V")
        tr = dynamics.simulate_complete(p, init, args.horizon, p_rtol, p_atol, t_eval=t_eval)
        end = tuple(tr.final)
        nu = sc.thresholds.nu_star
        lifted = [(e, dynamics.fast_equilibrium(e.location, nu)) for e in sc.equilibria]
        nearest, where = min(lifted, key=lambda pair: float(np.linalg.norm(np.subtract(end, pair[1]))))
        dist = float(np.linalg.norm(np.subtract(end, where)))
    art.add("trajectory.csv", tr.to_csv)
    art.commit()
    print("terminal = " + ",".join(_g(v) for v in end))
    print(f"nearest_equilibrium = {nearest.kind.value} ({nearest.stability.value}) at "
          + ",".join(_g(v) for v in where))
    print(f"distance = {_g(dist)}")
    print(f"label = {sc.label.value}")
    return EXIT_OK


def cmd_sweep(args, art: Artifacts) -> int:
    from .plotting import plot_region_map
    from .render import render

    p = load_params(args.params)
    spec = sweep.SweepSpec(p, args.axes[0], args.axes[1], args.range_x, args.range_y, args.res)
    grid = sweep.run_sweep(spec, workers=args.workers)
    image = f"grid.{args.image}"
    art.add("grid.csv", lambda path: sweep.write_grid_csv(grid, path))
    # render() dispatches on the suffix, so stage under a matching name
    art.add(image, lambda path: _render_as(render, grid, path, "." + args.image))
    if not args.no_figure:
        art.add("grid.png", lambda path: plot_region_map(grid, path))
    written = art.commit()
    counts: dict[str, int] = {}
    for lab in grid.labels.ravel():
        counts[lab.value] = counts.get(lab.value, 0) + 1
    for name in sorted(counts):
        print(f"{name} = {counts[name]}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _render_as(render, grid, path, suffix):
    tmp = Path(str(path) + suffix)
    render(grid, tmp)
    os.replace(tmp, path)


def cmd_validate(args, art: Artifacts) -> int:
    from .plotting import plot_aggregation

    p = load_params(args.params)
    report = sweep.validate_aggregation(p, args.eps, horizon=args.horizon)
    art.add("aggregation.csv", lambda path: sweep.write_aggregation_csv(report, path))
    if not args.no_figure:
        art.add("aggregation.png", lambda path: plot_aggregation(report, path))
    art.commit()
    print(f"label = {report.label.value}")
    for r in report.rows:
        flag = "" if r.converged else "  (inconclusive)"
        print(f"epsilon = {_g(r.epsilon)}  rel_distance = {_g(r.rel_distance)}{flag}")
    print(f"monotone = {str(report.monotone).lower()}")
    return EXIT_OK


COMMANDS = {
    "reduce": cmd_reduce,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coinfection", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--params", required=True, type=Path, help="flat key = value parameter file")
        sp.add_argument("--out", required=True, type=Path, help="output directory")
        return sp

    common("reduce", "aggregated coefficients and thresholds")
    common("classify", "long-term outcome of the aggregated model")

    sp = common("simulate", "integrate the complete or reduced system")
    sp.add_argument("--system", choices=("complete", "reduced"), default="reduced")
    sp.add_argument("--init", required=True, help="S,I (reduced) or S,U,V (complete)")
    sp.add_argument("--horizon", type=float, default=20.0, help="final slow time")
    sp.add_argument("--tol", type=_pair("--tol"), default=None, metavar="R,A")
    sp.add_argument("--samples", type=int, default=0,
                    help="evenly spaced output times (default: every accepted step)")

    sp = common("sweep", "outcome map over two parameters")
    sp.add_argument("--axes", type=_axes, default=("delta", "lambda"), metavar="X,Y")
    sp.add_argument("--range-x", type=_pair("--range-x"), default=(0.0, 10.0), metavar="A,B")
    sp.add_argument("--range-y", type=_pair("--range-y"), default=(0.0, 10.0), metavar="A,B")
    sp.add_argument("--res", type=_ints, default=(200, 200), metavar="N,M")
    sp.add_argument("--image", choices=("svg", "ppm"), default="svg")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--no-figure", action="store_true", help="skip the matplotlib PNG")

    sp = common("validate", "complete versus aggregated equilibrium for several epsilons")
    sp.add_argument("--eps", type=lambda t: _floats(t, name="--eps"), default=[1e-1, 1e-2, 1e-3])
    sp.add_argument("--horizon", type=float, default=50.0, help="final slow time")
    sp.add_argument("--no-figure", action="store_true", help="skip the matplotlib PNG")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    art = Artifacts(args.out)
    try:
        return COMMANDS[args.command](args, art)
    except ConfigError as exc:
        print(f"error: {args.params}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (sweep.SweepError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"error: integration failed at t={exc.t:.17g}: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
