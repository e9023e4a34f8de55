"""
Command-line front end: python -m rama <subcommand> [flags].

Subcommands: generators, build, analyze, ball, bounds. Reports go to stdout
(and --report / --csv files); exit code 0 when every check passes, 1 on any
FAIL, 2 on an error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from rama.analysis.coloring import (
    EXACT_MAX_VERTICES,
    chromatic_lower_bound, chromatic_number, color_class_cover_check, is_valid_coloring,
)
from rama.analysis.discrepancy import hypergraph_mixing_check, sampled_bipartite_mixing
from rama.analysis.geometry import (
    bipartiteness_check, diameter_check, injectivity_radius, tree_ball_sizes,
)
from rama.building.cslattice import (
    building_ball, export_ball, gaussian_binomial, generator_set, verify_local_structure,
)
from rama.complex.hypergraph import PartiteHypergraph, read_complex, walls_and_incidence, write_complex
from rama.core.errors import PreconditionError, RamaError
from rama.core.laurent import RelPosition, ValMatrix, classify_relation, relative_position
from rama.quotient.congruence import (
    CoverTable, GroupTable, cover_complex, cover_group, generate_group, group_complex, psl_order,
    search_polynomial, write_group,
)
from rama.schema import BOUND_SLACK, CommandConfig, CheckReport
from rama.spectral.bounds import (
    chromatic_bound_forms, colorful_mixing_bound, lambda_theoretical_bound, oh_bound, skeleton_ramanujan_bound,
    xi_pgl2,
)
from rama.spectral.spectra import (
    EIGEN_TOL, OperatorHandle, dense_spectrum, hecke_row_check, incidence_lambda, nn_transpose_check,
    second_eigenvalue, spectrum_symmetry_check, top_eigenpair_check, trivial_vectors,
)

logger = logging.getLogger("rama")


# --- generators -------------------------------------------------------------

def cmd_generators(cfg: CommandConfig) -> CheckReport:
    """Sigma_i sizes against Gaussian binomials and the relative position of every generator."""
    gens = generator_set(cfg.d, cfg.q)
    report = CheckReport(title=f"generators d={cfg.d} q={cfg.q}")
    identity = ValMatrix.identity(gens.rep.field, cfg.d)
    report.csv_rows.append(["type", "index", "relative_position", "matrix"])
    for i, level in enumerate(gens.sigma, start=1):
        expected = gaussian_binomial(cfg.d, i, cfg.q)
        report.check(f"sigma-{i}-size", len(level) == expected, len(level), expected, anchor="sigma-sizes")
        bad = 0
        for k, s in enumerate(level):
            a = relative_position(identity, s)
            rel = classify_relation(a, cfg.d)
            if not rel.neighbor or rel.type_offset != i:
                bad += 1
            report.csv_rows.append([i, k, str(a).replace(",", " "), s.serialize()])
        report.check(f"sigma-{i}-positions", bad == 0, bad, 0, anchor="sigma-sizes")
    report.note("sizes", ",".join(map(str, gens.sizes)))
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(f"SIGMA d={cfg.d} q={cfg.q} sizes={','.join(map(str, gens.sizes))}\n")
            for i, level in enumerate(gens.sigma, start=1):
                for s in level:
                    fh.write(f"{i} {s.serialize()}\n")
        logger.info("wrote %d generators to %s", sum(gens.sizes), cfg.output_path)
    return report


# --- build ------------------------------------------------------------------

def _build_group(cfg: CommandConfig) -> GroupTable:
    s = cfg.q ** cfg.e
    expected = psl_order(cfg.d, s) * cfg.target_r
    budget = cfg.max_elements
    if expected > budget:
        if not cfg.force:
            raise PreconditionError(
                f"the quotient has {expected} elements, above --max-elements {budget}; pass --force to build it")
        logger.warning("building a quotient of %d elements past the budget of %d", expected, budget)
        budget = expected
    cmap = search_polynomial(cfg.q, cfg.d, cfg.e, cfg.target_r)
    gens = generator_set(cfg.d, cfg.q)
    return generate_group(gens, cmap, max_elements=budget)


def cmd_build(cfg: CommandConfig) -> CheckReport:
    if cfg.output_path is None:
        raise PreconditionError("build needs --out")
    table = _build_group(cfg)
    h = group_complex(table)
    write_complex(h, cfg.output_path)
    report = CheckReport(title=f"build d={cfg.d} q={cfg.q} e={cfg.e}")
    report.note("f", table.cmap.f.serialize())
    report.note("r", table.r)
    report.note("order", table.order)
    report.note("facets", len(h.facets))
    report.check("partite-index", table.r == cfg.target_r, table.r, cfg.target_r)
    expected = psl_order(cfg.d, cfg.q ** cfg.e) * cfg.target_r
    report.check("group-order", table.order == expected, table.order, expected)
    report.check("purity", h.purity_violations == 0, h.purity_violations, 0)
    if cfg.group_path:
        write_group(table, cfg.group_path)
    if cfg.cover:
        cover = cover_group(table)
        ch = cover_complex(cover)
        path = str(Path(cfg.output_path).with_suffix(".cover.rcx"))
        write_complex(ch, path)
        report.note("cover_order", cover.order)
        report.note("cover_path", path)
    return report


# --- analyze ----------------------------------------------------------------

def _regular_degree(graph) -> int:
    degrees = np.asarray(graph.sum(axis=1)).ravel()
    if len(degrees) == 0 or np.any(degrees != degrees[0]):
        raise PreconditionError("spectral checks need a regular 1-skeleton")
    return int(degrees[0])


def _graph_eigenvalues(h: PartiteHypergraph, cfg: CommandConfig, bipartite_sides) -> Tuple[float, float]:
    """(lambda_1, largest nontrivial eigenvalue modulus) of the 1-skeleton."""
    graph = h.adjacency_matrix()
    k = _regular_degree(graph)
    if bipartite_sides is not None:
        exclude = trivial_vectors(bipartite_sides.tolist(), 2, h.n)
    else:
        exclude = trivial_vectors(h.types, h.r, h.n)
    method = "dense" if h.n <= cfg.dense_threshold else "iterative"
    lam = second_eigenvalue(OperatorHandle.from_matrix(graph), exclude, seed=cfg.seed,
                            maxiter=cfg.maxiter, method=method)
    return float(k), lam


def _lam_tildes(h: PartiteHypergraph, cfg: CommandConfig) -> List[float]:
    out = []
    for i in range(h.d - 1):
        _, b = walls_and_incidence(h, i)
        method = "dense" if len(b.left) + len(b.right) <= cfg.dense_threshold else "iterative"
        out.append(incidence_lambda(b, seed=cfg.seed, maxiter=cfg.maxiter, method=method)[1])
    return out


def _check_spectra(h, cfg, bip, report: CheckReport) -> None:
    lam1, lam = _graph_eigenvalues(h, cfg, bip.sides if bip.bipartite else None)
    report.note("lambda1", lam1)
    report.note("lambda2", lam)
    if cfg.q is not None:
        bound = skeleton_ramanujan_bound(h.d, cfg.q)
        report.check("ramanujan", lam <= bound + EIGEN_TOL, lam, bound, anchor="ramanujan")
    else:
        logger.warning("no --q given; Ramanujan bound not evaluated")
    if h.n <= cfg.dense_threshold:
        spectrum = dense_spectrum(OperatorHandle.from_matrix(h.adjacency_matrix()), cfg.dense_threshold)
        report.check("lambda1", abs(spectrum.eigenvalues[0] - lam1) <= EIGEN_TOL, float(spectrum.eigenvalues[0]), lam1,
                     anchor="biregular-top-eigenvalue")
        if bip.bipartite:
            ok, mismatch = spectrum_symmetry_check(spectrum)
            report.check("spectrum-symmetry", ok, mismatch, 0.0, anchor="bipartite-symmetry")
        report.csv_rows.append(["index", "eigenvalue"])
        report.csv_rows.extend([[k, float(v)] for k, v in enumerate(spectrum.eigenvalues)])
    if h.has_full_types:
        for i in range(h.d - 1):
            _, b = walls_and_incidence(h, i)
            if len(b.left) + len(b.right) > cfg.dense_threshold:
                continue
            report.extend(top_eigenpair_check(b, cfg.dense_threshold))
            ok, mismatch = nn_transpose_check(b, dense_threshold=cfg.dense_threshold)
            report.check(f"nn-transpose-{i}", ok, mismatch, EIGEN_TOL, anchor="two-step-spectrum")


def _check_mixing(h, cover_h, cfg, report: CheckReport) -> List[float]:
    """Mixing runs on the complex itself when it has a full type function, otherwise on its cover."""
    target = h if h.has_full_types else cover_h
    if target is None:
        raise PreconditionError("mixing on a non-partite complex needs its cover; pass --q --d --e --r")
    lam_tildes = _lam_tildes(target, cfg)
    for i, lt in enumerate(lam_tildes):
        report.note(f"lambda_tilde_{i}", lt)
    if cfg.q is not None:
        theory = lambda_theoretical_bound(cfg.q)
        for i, lt in enumerate(lam_tildes):
            report.check(f"lambda-tilde-{i}", lt <= theory.exact + EIGEN_TOL, lt, theory.exact,
                         anchor="wall-spectral-bound")
    if target.d == 2:
        report.extend(sampled_bipartite_mixing(target, lam_tildes[0], cfg.samples, cfg.seed))
    colorful = colorful_mixing_bound(target.d, cfg.q) if (target is cover_h and cfg.q) else None
    disc = hypergraph_mixing_check(target, lam_tildes, mode="sampled", samples=cfg.samples, seed=cfg.seed,
                                   colorful_bound=colorful, threads=cfg.threads)
    report.check("hypergraph-mixing-failures", disc.passed, disc.failures, 0, anchor="hypergraph-mixing")
    report.note("hypergraph_max_disc", disc.max_disc_exact)
    report.note("hypergraph_bound_at_worst", disc.hypergraph_bound_at_worst)
    return lam_tildes


def _check_partite_coloring(h: PartiteHypergraph, report: CheckReport) -> None:
    """
    A full type function is a d-coloring; merging types 1..d-1 leaves a
    2-coloring, optimal as soon as there is a facet.
    """
    report.check("type-coloring", is_valid_coloring(h, h.types), "valid", f"{h.d} colors", anchor="partite-coloring")
    merged = [0 if t == 0 else 1 for t in h.types]
    count = 2 if h.facets else 1
    report.check("two-coloring", is_valid_coloring(h, merged), count, 2, anchor="partite-coloring")
    report.note("chromatic_mode", "partite")
    report.note("chromatic_number", count)


def _check_color(h, cover: Optional[CoverTable], cover_h, cfg, report: CheckReport) -> None:
    if h.has_full_types:
        _check_partite_coloring(h, report)
        return
    result = chromatic_number(h, mode="exact" if h.n <= EXACT_MAX_VERTICES else "greedy")
    report.check("coloring-valid", is_valid_coloring(h, result.colors), result.count, None)
    report.note("chromatic_mode", result.mode)
    report.note("chromatic_upper", result.count)
    if cover is None or cfg.q is None:
        logger.warning("no cover available; chromatic lower bound not evaluated")
        return
    lam_tildes = _lam_tildes(cover_h, cfg)
    bound = chromatic_lower_bound(h.r, cfg.q, h.d, lam_tildes)
    report.note("chromatic_bound_half_root", bound.half_root)
    report.note("chromatic_bound_proof_form", bound.proof_form)
    report.note("chromatic_bound_empirical", bound.empirical)
    report.check("chromatic-bound", result.count >= bound.best - BOUND_SLACK, result.count, bound.best,
                 anchor="chromatic-bound")
    report.extend(color_class_cover_check(cover_h, cover.projection().tolist(), result.colors))


def _building_sizes(cfg: CommandConfig, order: int) -> List[int]:
    if cfg.d == 2:
        radius = 0
        while tree_ball_sizes(cfg.q, radius)[-1] <= order:
            radius += 1
        return tree_ball_sizes(cfg.q, radius)
    ball = building_ball(generator_set(cfg.d, cfg.q), cfg.radius, max_vertices=cfg.max_vertices)
    return ball.ball_sizes()


def _check_radius(h, cfg, report: CheckReport) -> None:
    if cfg.q is None or cfg.d is None:
        raise PreconditionError("the radius check needs --q and --d")
    rad = injectivity_radius(h.adjacency_matrix(), _building_sizes(cfg, h.n), q=cfg.q, d=cfg.d, e=cfg.e)
    report.note("injectivity_radius", rad.measured_radius)
    report.note("quotient_ball_sizes", ",".join(map(str, rad.quotient_sizes)))
    report.note("building_ball_sizes", ",".join(map(str, rad.building_sizes)))
    if rad.radius_lower_bound is not None:
        report.check("radius-lower-bound", rad.measured_radius >= rad.radius_lower_bound - BOUND_SLACK,
                     rad.measured_radius, rad.radius_lower_bound, anchor="injectivity-radius")
        report.check("displacement-lower-bound",
                     rad.displacement_from_radius >= rad.displacement_lower_bound - BOUND_SLACK,
                     rad.displacement_from_radius, rad.displacement_lower_bound, anchor="injectivity-radius")


def _check_diameter(h, cfg, bip, report: CheckReport) -> None:
    lam1, lam = _graph_eigenvalues(h, cfg, bip.sides if bip.bipartite else None)
    report.extend(diameter_check(h.adjacency_matrix(), lam1, lam, bip.bipartite, log_form=True))


def _note_bipartiteness(bip, report: CheckReport) -> None:
    report.note("bipartite", bip.bipartite)
    if not bip.bipartite:
        report.note("odd_walk_length", len(bip.witness) - 1)
        report.note("odd_walk", " ".join(map(str, bip.witness)))


def cmd_analyze(cfg: CommandConfig) -> CheckReport:
    if cfg.input_path is None:
        raise PreconditionError("analyze needs --in")
    h = read_complex(cfg.input_path)
    if cfg.d is None:
        cfg = cfg.model_copy(update={"d": h.d})
    elif cfg.d != h.d:
        raise PreconditionError(f"--d {cfg.d} does not match the complex (d = {h.d})")
    report = CheckReport(title=f"analyze {Path(cfg.input_path).name}")
    report.note("d", h.d)
    report.note("vertices", h.n)
    report.note("facets", len(h.facets))
    report.note("r", h.r)
    report.note("seed", cfg.seed)

    cover, cover_h = None, None
    if None not in (cfg.q, cfg.d, cfg.e, cfg.target_r):
        table = _build_group(cfg)
        rebuilt = group_complex(table)
        report.check("rebuilt-matches-input", rebuilt.structurally_equal(h), len(rebuilt.facets), len(h.facets))
        if table.r == 1:
            cover = cover_group(table)
            cover_h = cover_complex(cover)

    bip = bipartiteness_check(h.adjacency_matrix())
    _note_bipartiteness(bip, report)

    checks = cfg.selected_checks
    if "spectra" in checks:
        _check_spectra(h, cfg, bip, report)
    if "mixing" in checks:
        _check_mixing(h, cover_h, cfg, report)
    if "color" in checks:
        _check_color(h, cover, cover_h, cfg, report)
    if "radius" in checks:
        _check_radius(h, cfg, report)
    if "diameter" in checks:
        _check_diameter(h, cfg, bip, report)
    return report


# --- ball -------------------------------------------------------------------

def cmd_ball(cfg: CommandConfig) -> CheckReport:
    gens = generator_set(cfg.d, cfg.q)
    ball = building_ball(gens, cfg.radius, max_vertices=cfg.max_vertices)
    report = CheckReport(title=f"ball d={cfg.d} q={cfg.q} radius={cfg.radius}")
    report.note("ball_sizes", ",".join(map(str, ball.ball_sizes())))
    if cfg.radius >= 2:
        report.extend(verify_local_structure(ball, cfg.q, cfg.d))
        report.extend(hecke_row_check(ball, cfg.q, cfg.d))
    else:
        logger.warning("radius %d < 2: local structure checks skipped", cfg.radius)
    if cfg.output_path:
        export_ball(ball, cfg.output_path)
    return report


# --- bounds -----------------------------------------------------------------

def cmd_bounds(cfg: CommandConfig) -> CheckReport:
    """Tables of the closed-form bounds; every row doubles as a consistency check."""
    qs = cfg.qs or [3, 5, 9, 27, 81]
    ds = cfg.ds or [2, 3]
    report = CheckReport(title="bounds")
    report.csv_rows.append(["table", "q", "d_or_n", "value", "second"])
    for q in qs:
        for n in range(6):
            xi = xi_pgl2(n, q)
            report.csv_rows.append(["xi_pgl2", q, n, xi.value, xi.crude])
        lam = lambda_theoretical_bound(q)
        report.check(f"lambda-bound-q{q}", lam.exact <= lam.simplified + BOUND_SLACK, lam.exact, lam.simplified,
                     anchor="wall-spectral-bound")
        report.csv_rows.append(["lambda", q, "", lam.exact, lam.simplified])
        wall = RelPosition((0, 1, 2))
        report.csv_rows.append(["oh_wall", q, "", oh_bound(wall, q), 3 / q])
        for d in ds:
            half_root, proof_form = chromatic_bound_forms(q, d)
            report.check(f"chromatic-forms-q{q}-d{d}", proof_form >= half_root - BOUND_SLACK,
                         proof_form, half_root, anchor="chromatic-bound")
            report.csv_rows.append(["chromatic", q, d, half_root, proof_form])
            report.csv_rows.append(["colorful_mixing", q, d, colorful_mixing_bound(d, q), ""])
            report.csv_rows.append(["ramanujan_skeleton", q, d, skeleton_ramanujan_bound(d, q), ""])
    return report


# --- entry point ------------------------------------------------------------

COMMANDS = {
    "generators": cmd_generators,
    "build": cmd_build,
    "analyze": cmd_analyze,
    "ball": cmd_ball,
    "bounds": cmd_bounds,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log-level", default="INFO", help="Logging level")
    p.add_argument("--threads", type=int, default=1, help="Worker threads for sampled checks")
    p.add_argument("--max-vertices", type=int, default=2_000_000, help="Building ball vertex budget")
    p.add_argument("--max-elements", type=int, default=5_000_000, help="Group element budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rama", description="Ramanujan complex quotients toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generators", help="Enumerate Sigma_1, ..., Sigma_{d-1}")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", dest="output_path")
    _add_common(p)

    p = sub.add_parser("build", help="Build a congruence quotient and write its complex")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--e", type=int, required=True)
    p.add_argument("--r", dest="target_r", type=int, required=True)
    p.add_argument("--out", dest="output_path", required=True)
    p.add_argument("--group-out", dest="group_path")
    p.add_argument("--cover", action="store_true", help="Also write the d-fold partite cover")
    p.add_argument("--force", action="store_true", help="Build past --max-elements")
    _add_common(p)

    p = sub.add_parser("analyze", help="Run spectral, mixing, coloring and metric checks")
    p.add_argument("--in", dest="input_path", required=True)
    p.add_argument("--checks", nargs="+", default=["all"])
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--q", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--e", type=int)
    p.add_argument("--r", dest="target_r", type=int)
    p.add_argument("--radius", type=int, default=2, help="Building oracle radius for d >= 3")
    p.add_argument("--dense-threshold", type=int, default=4096)
    p.add_argument("--maxiter", type=int, default=5000)
    p.add_argument("--force", action="store_true")
    p.add_argument("--report", dest="report_path")
    p.add_argument("--csv", dest="csv_path")
    _add_common(p)

    p = sub.add_parser("ball", help="Building ball around the standard vertex")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--out", dest="output_path")
    _add_common(p)

    p = sub.add_parser("bounds", help="Tabulate the closed-form bounds")
    p.add_argument("--q", dest="qs", type=int, nargs="+", default=[])
    p.add_argument("--d", dest="ds", type=int, nargs="+", default=[])
    p.add_argument("--csv", dest="csv_path")
    _add_common(p)
    return parser


def _emit(report: CheckReport, cfg: CommandConfig) -> None:
    text = report.render()
    sys.stdout.write(text)
    if cfg.report_path:
        Path(cfg.report_path).write_text(text)
    if cfg.csv_path and report.csv_rows:
        Path(cfg.csv_path).write_text(report.render_csv())


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    values = {k: v for k, v in vars(args).items() if v is not None}
    logging.basicConfig(level=getattr(logging, str(values.get("log_level", "INFO")).upper(), logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        cfg = CommandConfig.resolve(**values)
        logger.info("config: %s", cfg.model_dump())
        report = COMMANDS[cfg.subcommand](cfg)
    except RamaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(report, cfg)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
