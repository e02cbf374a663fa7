# src/cli.py
"""
Command line front end for hierstab
Parses flags into an ExperimentConfig, runs the mapped analysis and writes
JSON or CSV artifacts atomically
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import argparse
import json
import logging
import sys

import numpy as np
from pydantic import ValidationError

from .core.config import CLI_CONFIG, MONTE_CARLO_CONFIG, setup_logging, validate_config
from .core.exceptions import CapacityError, DomainError, HierStabError
from .core.models import Command, ExperimentConfig, FunctionDescriptor, OutputFormat
from .utils.io_utils import atomic_write_text, parse_range, render_csv, render_json
from .analysis import catalog, efron_stein, fourier, hierarchy, maxcorr, percolation
from .analysis.product_space import ProductSpace, build_space

logger = logging.getLogger(__name__)

BUILDERS = {
    "recursive-majority": hierarchy.recursive_majority,
    "parity-tree": hierarchy.parity_tree,
    "cos-arccos": hierarchy.cos_arccos_tree,
    "majority-leak": hierarchy.majority_leak_tree,
}

DEMOS = ("cos-arccos", "majority-leak", "recursive-majority", "parity-tree")

DEMO_ALIASES = {
    "example-1.3": "cos-arccos",
    "example-1.4": "majority-leak",
}


def parse_values(text: Optional[str]) -> Optional[List[float]]:
    """Comma separated list of values and ranges (a..b, a..b/step)"""
    if text is None:
        return None
    values: List[float] = []
    for part in str(text).split(","):
        if part.strip():
            values.extend(parse_range(part.strip()))
    return values


def _load_json(path: Path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


class ExperimentRunner:
    """
    Runs one validated command line invocation
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.params = config.params
        self.run_stats = {
            'command': config.command.value,
            'rows': 0,
            'artifact': None,
        }

    # ---- input helpers ----

    def load_space(self) -> Optional[ProductSpace]:
        path = self.config.inputs.get('space')
        return build_space(_load_json(path)) if path else None

    def load_function(self, space: Optional[ProductSpace]) -> fourier.FunctionTable:
        flag = self.params.get('fn')
        if flag is None:
            raise DomainError("--fn is required for this command")
        if str(flag).startswith("named:"):
            descriptor = FunctionDescriptor.from_flag(flag)
        else:
            descriptor = FunctionDescriptor.model_validate(_load_json(Path(flag)))
        return catalog.build_function(descriptor, space)

    def rhos(self, default: Optional[List[float]] = None) -> List[float]:
        rhos = self.params.get('rho')
        if rhos is None:
            if default is None:
                raise DomainError("--rho is required for this command")
            return default
        return [float(r) for r in (rhos if isinstance(rhos, list) else [rhos])]

    def build_tree(self, space: Optional[ProductSpace]):
        if 'tree' in self.config.inputs:
            return hierarchy.hierarchy_from_descriptor(_load_json(self.config.inputs['tree']), space)
        builder = self.params['builder']
        if builder not in BUILDERS:
            raise DomainError(f"unknown builder: {builder}")
        return BUILDERS[builder](self.depth())

    def depth(self, default: int = 2) -> int:
        depths = self.params.get('depths')
        return int(depths[0]) if depths else default

    def samples(self) -> int:
        return int(self.params.get('samples') or CLI_CONFIG["default_samples"])

    # ---- commands ----

    def run_analyze(self) -> Tuple[Dict, List[Dict]]:
        space = self.load_space()
        table = self.load_function(space)
        expansion = fourier.expand(table)
        d_lin = fourier.distance_to_lin(expansion)
        per_coordinate = space.pearsons.tolist() if space is not None else None
        rhos = self.rhos(default=[per_coordinate] if per_coordinate is not None else None)
        D = int(self.params.get('D') or 1)

        results = []
        for rho in rhos:
            lemma = fourier.check_lemma_multilinear(expansion, rho)
            entry = {
                "rho": rho,
                "stability": fourier.stability(expansion, rho),
                "d_lin": d_lin,
                "lemma_bound": lemma.bound,
                "lemma_holds": lemma.holds,
                "floor": lemma.floor,
            }
            top = lemma.rho
            if 0.0 < top < 1.0:
                entry["low_degree"] = fourier.check_low_degree_bound(expansion, D, top).model_dump()
            results.append(entry)

        payload = {
            "n": table.n,
            "mean": expansion.mean,
            "variance": expansion.variance,
            "d_lin": d_lin,
            "coefficients": {str(k): v for k, v in expansion.nonzero(1e-15).items()},
            "degree_weights": fourier.degree_weights(expansion).tolist(),
            "low_degree_mass": [fourier.low_degree_mass(expansion, k) for k in range(1, table.n + 1)],
            "results": results,
        }
        if len(results) == 1:
            payload.update({k: v for k, v in results[0].items() if k != "rho"})
        rows = [{k: r[k] for k in ("rho", "stability", "d_lin", "lemma_bound", "lemma_holds")}
                for r in results]
        for row in rows:
            if isinstance(row["rho"], list):
                row["rho"] = max(row["rho"])
        return payload, rows

    def run_hierarchy(self) -> Tuple[Dict, List[Dict]]:
        space = self.load_space()
        root = self.build_tree(space)
        tree = hierarchy.certify(root, space, strict=not self.params.get('no_strict', False))
        rhos = self.rhos()
        samples = self.params.get('samples')

        results, rows = [], []
        for rho in rhos:
            entry: Dict[str, Any] = {"rho": rho}
            if not hierarchy.is_analytic(root):
                entry["recursive"] = hierarchy.stability_recursive(tree, rho)
                try:
                    entry["exact"] = hierarchy.stability_exact(root, rho, space)
                except CapacityError as e:
                    logger.info("exact stability skipped: %s", e)
                    entry["exact"] = None
            if samples:
                entry["mc"] = hierarchy.stability_mc(root, rho, self.config.seed, int(samples), space,
                                                     workers=self.config.workers).model_dump()
            if 0.0 < tree.epsilon and rho < 1.0 and tree.depth >= 1:
                eps = min(1.0, tree.epsilon)
                entry["decay"] = hierarchy.decay_bounds(eps, self.params.get('delta'), rho,
                                                        tree.depth, exact=entry.get("exact")).model_dump()
            results.append(entry)
            rows.append({"rho": rho, "depth": tree.depth, "epsilon": tree.epsilon,
                         "recursive": entry.get("recursive"), "exact": entry.get("exact"),
                         "mc": entry["mc"]["estimate"] if "mc" in entry else None})

        payload = {
            "depth": tree.depth,
            "epsilon": tree.epsilon,
            "passed": tree.passed,
            "certificates": [c.model_dump() for c in tree.certificates],
            "results": results,
        }
        return payload, rows

    def run_decay(self) -> Tuple[Dict, List[Dict]]:
        eps = float(self.params['eps'])
        delta = self.params.get('delta')
        t = self.params.get('resilient_t')
        reports = []
        for rho in self.rhos():
            for d in self.params.get('depths') or [1]:
                reports.append(hierarchy.decay_bounds(eps, delta, rho, int(d),
                                                      resilient_t=int(t) if t is not None else None))
        rows = [r.model_dump(exclude={"exact_or_mc", "exact", "constant_source"}) for r in reports]
        return {"bounds": [r.model_dump() for r in reports]}, rows

    def run_maxcorr(self) -> Tuple[Dict, List[Dict]]:
        space = self.load_space()
        if space is None:
            raise DomainError("maxcorr needs --space")
        rows = [{"coordinate": i, "pearson": pair.pearson,
                 "maxcorr": maxcorr.maximal_correlation(pair),
                 "maxcorr_power": maxcorr.maximal_correlation_power(pair)}
                for i, pair in enumerate(space.pairs)]
        payload: Dict[str, Any] = {"pairs": rows}
        if self.params.get('fn'):
            table = self.load_function(space)
            payload["non_separability"] = maxcorr.non_separability(table).model_dump()
            payload["lemma"] = maxcorr.check_nonseparable_lemma(table, space).model_dump()
        return payload, rows

    def run_es(self) -> Tuple[Dict, List[Dict]]:
        space = self.load_space()
        table = self.load_function(space)
        decomposition = efron_stein.decompose(table)
        masses = [efron_stein.es_degree_mass(decomposition, k) for k in range(table.n + 1)]
        payload: Dict[str, Any] = {
            "components": decomposition.export(full=bool(self.params.get('full'))),
            "degree_mass": masses,
            "checks": decomposition.check(table),
        }
        coupled = space
        if self.params.get('rho') is not None:
            coupled = ProductSpace.from_marginals(table.space.x_marginals, self.rhos()[0])
        if coupled is not None:
            payload["contraction"] = efron_stein.markov_contract_check(decomposition, coupled).model_dump()
        rows = [{"subset": int(k), "norm_sq": v["norm_sq"]} for k, v in payload["components"].items()]
        return payload, rows

    def run_percolation(self) -> Tuple[Dict, List[Dict]]:
        sizes = [int(n) for n in (self.params.get('n') or [8])]
        mode = self.params.get('mode') or "stability"
        seed, workers = self.config.seed, self.config.workers
        rows: List[Dict] = []

        if mode == "spectrum":
            profiles = [percolation.exact_spectrum_small(percolation.TriangularGrid.build(n)) for n in sizes]
            for pr in profiles:
                for D, (w, c, nc, m) in enumerate(zip(pr.weights, pr.cumulative,
                                                      pr.normalized_cumulative, pr.low_degree_mass)):
                    rows.append({"n": pr.n, "D": D, "weight": w, "cumulative": c,
                                 "normalized": nc, "low_degree_mass": m})
            D = int(self.params.get('D') or 1)
            return {"profiles": [p.model_dump() for p in profiles],
                    "trend": percolation.low_degree_trend(profiles, D)}, rows

        for n in sizes:
            grid = percolation.TriangularGrid.build(n)
            if mode == "probability":
                p = float(self.params.get('p') if self.params.get('p') is not None else 0.5)
                est = percolation.crossing_probability(grid, p, seed, self.samples(), workers)
                rows.append({"n": n, "p": p, "samples": est.samples, "estimate": est.estimate,
                             "ci_low": est.ci_low, "ci_high": est.ci_high, "seed": seed})
            else:
                for rho in self.rhos():
                    est = percolation.crossing_stability(grid, rho, seed, self.samples(), workers=workers)
                    rows.append({"n": n, "rho": rho, "samples": est.samples, "estimate": est.estimate,
                                 "ci_low": est.ci_low, "ci_high": est.ci_high, "seed": seed})
        return {"mode": mode, "results": rows}, rows

    def run_demo(self) -> Tuple[Dict, List[Dict]]:
        name = DEMO_ALIASES.get(self.params['name'], self.params['name'])
        if name not in DEMOS:
            raise DomainError(f"unknown demo: {name}")
        depth = self.depth()
        rhos = self.rhos(default=[0.9])
        samples = self.params.get('samples')
        root = BUILDERS[name](depth)
        payload: Dict[str, Any] = {"name": name, "depth": depth}

        if name == "cos-arccos":
            rng = np.random.default_rng(self.config.seed)
            points = rng.random((100, hierarchy.leaf_count(root)))
            outputs = hierarchy.evaluate_batch(root, points)
            payload["max_abs_error_vs_x1"] = float(np.max(np.abs(outputs - points[:, 0]))) \
                if depth % 2 == 0 else None
        elif name == "majority-leak":
            payload["evaluation_check"] = _check_majority_leak(root, depth)
            payload["floor"] = [hierarchy.majority_leak_floor(depth, rho) for rho in rhos]

        tree = hierarchy.certify(root, strict=False)
        payload["certification_passed"] = tree.passed
        payload["certificates"] = [c.model_dump() for c in tree.certificates]

        rows = []
        for rho in rhos:
            row: Dict[str, Any] = {"rho": rho}
            if not hierarchy.is_analytic(root):
                try:
                    row["exact"] = hierarchy.stability_exact(root, rho)
                except CapacityError:
                    row["exact"] = None
                if name in ("recursive-majority", "parity-tree"):
                    row["recursive"] = hierarchy.stability_recursive(tree, rho)
            if name == "parity-tree":
                row["doubly_exponential"] = rho ** (2 ** depth)
            if samples:
                row["mc"] = hierarchy.stability_mc(root, rho, self.config.seed, int(samples),
                                                   workers=self.config.workers).estimate
            rows.append(row)
        payload["results"] = rows
        return payload, rows

    # ---- driver ----

    def execute(self) -> Tuple[Dict, List[Dict]]:
        handler = getattr(self, f"run_{self.config.command.value}")
        logger.info("running %s", self.config.command.value)
        return handler()

    def emit(self, payload: Dict, rows: List[Dict]) -> str:
        if self.config.format == OutputFormat.CSV:
            text = render_csv(rows)
        else:
            text = render_json(payload)
        self.run_stats['rows'] = len(rows)
        if self.config.out is not None:
            atomic_write_text(self.config.out, text)
            self.run_stats['artifact'] = str(self.config.out)
            logger.info("wrote %s", self.config.out)
        else:
            sys.stdout.write(text)
        return text

    def run(self) -> int:
        """Execute and emit; returns the process exit status"""
        payload, rows = self.execute()
        self.emit(payload, rows)
        return 0


def _check_majority_leak(root, depth: int) -> Dict[str, Any]:
    """Compare the tree with x_1 + 10 * recursive majority on every Boolean input"""
    n = 3 ** depth
    if n > 20:
        return {"inputs": 0, "mismatches": None}
    space = ProductSpace.uniform_cube(n)
    points = space.x_points()
    level = points
    for _ in range(depth):
        level = catalog.majority(level.reshape(-1, 3)).reshape(points.shape[0], -1)
    expected = points[:, 0] + 10.0 * level[:, 0]
    actual = hierarchy.evaluate_batch(root, points)
    return {"inputs": int(points.shape[0]), "mismatches": int(np.sum(actual != expected))}


# ===============================================
# Argument parsing
# ===============================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=CLI_CONFIG["default_seed"], help='64-bit seed')
    common.add_argument('--format', choices=[f.value for f in OutputFormat],
                        default=CLI_CONFIG["default_format"], help='Output format')
    common.add_argument('--out', help='Output file (stdout when omitted)')
    common.add_argument('--workers', type=int, default=MONTE_CARLO_CONFIG["workers"], help='Worker threads')
    common.add_argument('--samples', help='Monte Carlo sample count')
    common.add_argument('--rho', help='Correlation(s): value, list or a..b/step range')
    common.add_argument('--log-level', help='Logging level')

    parser = argparse.ArgumentParser(prog='hierstab', description='Noise stability of hierarchical functions')
    sub = parser.add_subparsers(dest='command', required=True)

    analyze = sub.add_parser('analyze', parents=[common], help='Fourier analysis of one function')
    analyze.add_argument('--fn', required=True, help='named:<name>[:n] or a function descriptor JSON file')
    analyze.add_argument('--space', help='Space descriptor JSON file')
    analyze.add_argument('--D', help='Degree for the low-degree bound')

    hier = sub.add_parser('hierarchy', parents=[common], help='Certify a hierarchy and measure its stability')
    hier.add_argument('--tree', help='Hierarchy descriptor JSON file')
    hier.add_argument('--builder', choices=sorted(BUILDERS), help='Built-in hierarchy')
    hier.add_argument('--depth', '--depths', dest='depths', help='Depth of a built-in hierarchy')
    hier.add_argument('--space', help='Leaf space descriptor JSON file')
    hier.add_argument('--delta', type=float, help='Decay rate parameter')
    hier.add_argument('--no-strict', action='store_true', help='Report failed certificates instead of exiting')

    decay = sub.add_parser('decay', parents=[common], help='Decay bound calculator')
    decay.add_argument('--eps', type=float, required=True)
    decay.add_argument('--delta', type=float)
    decay.add_argument('--depth', '--depths', dest='depths', default='1', help='Depth(s)')
    decay.add_argument('--resilient-t', type=int, help='Resilience order t')

    mc = sub.add_parser('maxcorr', parents=[common], help='Maximal correlation and non-separability')
    mc.add_argument('--space', required=True, help='Space descriptor JSON file')
    mc.add_argument('--fn', help='Function for the non-separability report')

    es = sub.add_parser('es', parents=[common], help='Efron-Stein decomposition')
    es.add_argument('--fn', required=True)
    es.add_argument('--space', help='Space descriptor JSON file')
    es.add_argument('--full', action='store_true', help='Export full component tables')

    perc = sub.add_parser('percolation', parents=[common], help='Crossing event experiments')
    perc.add_argument('--n', default='8', help='Grid side(s)')
    perc.add_argument('--mode', choices=['probability', 'stability', 'spectrum'], default='stability')
    perc.add_argument('--p', type=float, help='Opening probability')
    perc.add_argument('--D', help='Degree for the trend report')

    demo = sub.add_parser('demo', parents=[common], help='Worked examples')
    demo.add_argument('--name', required=True, choices=[*DEMOS, *DEMO_ALIASES])
    demo.add_argument('--depth', '--depths', dest='depths', help='Depth')

    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Collect parsed flags into a validated ExperimentConfig"""
    inputs = {key: Path(getattr(args, key)) for key in ('space', 'tree')
              if getattr(args, key, None)}
    params: Dict[str, Any] = {}
    rho = parse_values(args.rho)
    if rho is not None:
        params['rho'] = rho
    if args.samples is not None:
        params['samples'] = int(float(args.samples))
    for key in ('fn', 'builder', 'eps', 'delta', 'resilient_t', 'mode', 'p', 'name', 'full', 'no_strict'):
        value = getattr(args, key, None)
        if value is not None and value is not False:
            params[key] = value
    if getattr(args, 'depths', None):
        params['depths'] = [int(d) for d in parse_values(args.depths)]
    if getattr(args, 'D', None):
        params['D'] = int(args.D)
    if args.command == 'percolation':
        params['n'] = [int(n) for n in parse_values(args.n)]
    return ExperimentConfig(command=Command(args.command), inputs=inputs,
                            out=Path(args.out) if args.out else None, seed=args.seed,
                            format=OutputFormat(args.format), workers=args.workers, params=params)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main function for command line execution

    Returns:
        int: 0 on success, 2 validation error, 3 capacity error, 4 numerical error
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    if not validate_config():
        return 2

    try:
        config = config_from_args(args)
        return ExperimentRunner(config).run()
    except (ValidationError, DomainError, ValueError, KeyError) as e:
        logger.error("invalid input: %s", e)
        return 2
    except HierStabError as e:
        # capacity 3, numerical 4
        logger.error("%s", e)
        return e.exit_code
    except FileNotFoundError as e:
        logger.error("input file not found: %s", e)
        return 2
    except KeyboardInterrupt:
        logger.warning("interrupted")
        return 1


if __name__ == "__main__":
    sys.exit(main())
