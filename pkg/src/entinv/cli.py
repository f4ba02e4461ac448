"""Command-line front end.

Every command prints one JSON report (or CSV for sweeps). Reports carry a
schema tag, the parameters, route-tagged results and a list of checks; the
wall time sits in its own top-level key so the rest is byte-stable for a
fixed seed.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input,
3 resource cap.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import click

from . import __version__
from . import circuits, fib, oracle, qdouble, sectors
from .lattice import (
    CappedCylinder,
    GeometryError,
    Lattice,
    capped_cylinder,
    fatten,
    parse_annulus,
    parse_lattice,
    rect_annulus,
    rect_disc,
    ring_annulus,
    tripartition,
)
from .pauli import PauliError, build_model

SCHEMA = "entinv.report/1"
AGREE_TOL = 1e-9
SPOT_TOL = 1e-8
QD_TOL = 1e-12
WALL_KEY = "wall_time_s"

_INPUT_ERRORS = (GeometryError, PauliError, qdouble.GroupError, circuits.CircuitError, ValueError, KeyError)


class InputError(click.ClickException):
    exit_code = 2


class CapError(click.ClickException):
    exit_code = 3


# --------------------------------------------------------------------------
# geometry literals


def parse_geometry(text: str):
    """``"8x8"`` -> torus; ``"sphere:2,2,2,2"`` -> capped cylinder."""
    if text.startswith("sphere:"):
        try:
            rings = tuple(int(v) for v in text[len("sphere:"):].split(","))
        except ValueError as exc:
            raise GeometryError(f"bad ring list in {text!r}") from exc
        return capped_cylinder(rings)
    return parse_lattice(text)


def parse_region(geom, text: str | None):
    """Torus: ``x,y,W,H,wT``. Sphere: ``rings:a-b`` or ``rings:a-b:open``."""
    if isinstance(geom, CappedCylinder):
        text = text or "rings:1-2:open"
        parts = text.split(":")
        if parts[0] != "rings" or len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "open"):
            raise GeometryError(f"sphere annulus must look like rings:a-b[:open], got {text!r}")
        try:
            a, b = (int(v) for v in parts[1].split("-"))
        except ValueError as exc:
            raise GeometryError(f"bad ring range in {text!r}") from exc
        return ring_annulus(geom, a, b, closed=len(parts) == 2)
    if text is None:
        return rect_annulus(geom, (0, 0), geom.Lx - 1, geom.Ly - 1, 2)
    return parse_annulus(geom, text)


# --------------------------------------------------------------------------
# report plumbing


def check(name: str, passed: bool, value, expected=None, tol=None, route: str | None = None) -> dict:
    return {"name": name, "pass": bool(passed), "value": value, "expected": expected, "tol": tol, "route": route}


def report(command: str, params: dict, results: dict, checks: list[dict]) -> dict:
    failures = [c["name"] for c in checks if not c["pass"]]
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "params": params,
        "results": results,
        "checks": checks,
        "failures": failures,
        "pass": not failures,
    }


def dumps(rep: dict) -> str:
    return json.dumps(rep, sort_keys=True, indent=2, allow_nan=True) + "\n"


def emit(ctx: click.Context, rep: dict, started: float, text: str | None = None) -> None:
    opts = ctx.params
    if text is None:
        if not opts.get("no_timing"):
            rep = {**rep, WALL_KEY: round(time.perf_counter() - started, 6)}
        text = dumps(rep)
    out = opts.get("out")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    if not rep["pass"]:
        ctx.exit(1)


def run_guarded(fn, command: str, params: dict):
    """Map library errors onto the documented exit codes. A failed internal
    cross-check becomes a failing report rather than a traceback."""
    try:
        return fn()
    except AssertionError as exc:
        return report(command, params, {"error": str(exc)}, [check("internal_cross_check", False, str(exc))])
    except oracle.SizeCapError as exc:
        raise CapError(str(exc)) from exc
    except _INPUT_ERRORS as exc:
        raise InputError(str(exc)) from exc


def rows_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def output_options(fn):
    fn = click.option("--no-timing", is_flag=True, help="Omit the wall-time field.")(fn)
    return click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout.")(fn)


@click.group()
@click.version_option(__version__, prog_name="entinv")
def main():
    """Entropic invariant experiments."""


@main.command()
@click.option("--model", type=click.Choice(["toric", "trivial"]), default="toric", show_default=True)
@click.option("--lat", default="8x8", show_default=True, help="LxxLy torus or sphere:r1,r2,...")
@click.option("--annulus", default=None, help="x,y,W,H,wT on a torus; rings:a-b[:open] on a sphere.")
@click.option("--route", type=click.Choice(["stabilizer", "dense", "both"]), default="stabilizer", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@output_options
@click.pass_context
def invariant(ctx, model, lat, annulus, route, seed, out, no_timing):
    """Invariant I(A) of the model's ground state on an annulus."""
    started = time.perf_counter()

    def body():
        geom = parse_geometry(lat)
        m = build_model(model, geom)
        A = parse_region(geom, annulus)
        choice = sectors.default_choice(m)
        results, checks = {"annulus": A.describe(), "n_sites": m.n, "n_a": len(A.region)}, []
        stab = dense = None
        if route in ("stabilizer", "both"):
            stab = sectors.invariant_bits(m, A, choice)
            results["stabilizer"] = stab.as_dict()
            checks.append(check("rank_formula_integral", stab.value_bits.denominator == 1, str(stab.value_bits), route="stabilizer"))
        if route in ("dense", "both"):
            dense = oracle.dense_invariant(m, A, choice, seed)
            results["dense"] = dense.as_dict()
            gap = abs(dense.relative_entropy_bits - dense.max_relative_entropy_bits)
            checks.append(check("dmax_equals_d", gap < AGREE_TOL, gap, 0.0, AGREE_TOL, "dense"))
        if stab is not None and dense is not None:
            gap = abs(float(stab.value_bits) - dense.relative_entropy_bits)
            results["agreement"] = {"abs_diff_bits": gap, "tol": AGREE_TOL}
            checks.append(check("routes_agree", gap < AGREE_TOL, gap, 0.0, AGREE_TOL, "both"))
        params = {"model": model, "lat": lat, "annulus": A.describe(), "route": route, "seed": seed}
        return report("invariant", params, results, checks)

    emit(ctx, run_guarded(body, "invariant", {"model": model, "lat": lat, "annulus": annulus, "route": route, "seed": seed}), started)


@main.command("qdouble")
@click.option("--group", "group_name", default="Z2", show_default=True, help="Z<n>, S3, D<n>, Q8, products like Z2xZ2.")
@click.option("--route", type=click.Choice(["closed", "dense", "both"]), default="closed", show_default=True)
@click.option("--lat", default="sphere:2,2,2,2", show_default=True, help="Sphere for the dense rank count.")
@click.option("--annulus", default=None, help="rings:a-b[:open] band for the dense rank count.")
@click.option("--nprime", type=int, default=2, show_default=True, help="Inner boundary count for the closed form.")
@click.option("--Nprime", "Nprime", type=int, default=2, show_default=True, help="Outer boundary count for the closed form.")
@click.option("--seed", type=int, default=0, show_default=True)
@output_options
@click.pass_context
def qdouble_cmd(ctx, group_name, route, lat, annulus, nprime, Nprime, seed, out, no_timing):
    """Anyon table, total dimension and invariant of a quantum double."""
    started = time.perf_counter()

    def body():
        G = qdouble.parse_group(group_name)
        tab = qdouble.anyon_table(G, seed)
        inv = qdouble.invariant_qd(G, tab)
        expected_bits = 2 * math.log2(G.order)
        results = {
            "group": G.name,
            "order": G.order,
            "abelian": G.is_abelian(),
            "class_sizes": [len(c) for c in qdouble.conjugacy_classes(G)],
            "anyons": [{"label": a.name, "quantum_dim": a.quantum_dim} for a in tab.labels],
            "n_anyons": len(tab),
            "total_dim_sq": tab.total_dim_sq,
            "invariant": {"route": "closed", "ratio": str(inv.ratio), "bits": inv.bits},
        }
        checks = [
            check("sum_d2_equals_order_sq", tab.total_dim_sq == G.order**2, tab.total_dim_sq, G.order**2, 0, "closed"),
            check("invariant_is_2log2G", abs(inv.bits - expected_bits) < QD_TOL, inv.bits, expected_bits, QD_TOL, "closed"),
        ]
        if route == "closed":
            dims = qdouble.thin_annulus_dims(G, nprime, Nprime, tab)
            results["thin_annulus"] = {"route": "closed", "nprime": nprime, "Nprime": Nprime, **dims.as_dict()}
        else:
            cc = parse_geometry(lat)
            if not isinstance(cc, CappedCylinder):
                raise GeometryError("the dense rank count runs on sphere:... geometries")
            A = parse_region(cc, annulus)
            aplus = fatten(cc, A.region, list(cc.stars) + list(cc.plaquettes))
            n_in, n_out = qdouble.boundary_counts(aplus.sites, A.hole.sites, cc.plaquettes)
            dims = qdouble.thin_annulus_dims(G, n_in, n_out, tab)
            results["thin_annulus"] = {"route": "closed", "nprime": n_in, "Nprime": n_out, **dims.as_dict()}
            if route in ("dense", "both"):
                cnt = oracle.thin_annulus_ranks(G, cc, A)
                results["thin_annulus_dense"] = {"route": "dense", "annulus": A.describe(), "total": cnt.total, "vacuum": cnt.vacuum, "n_aplus": cnt.n_sites}
                checks.append(check("dense_total_rank", cnt.total == dims.total, cnt.total, dims.total, 0, "both"))
                checks.append(check("dense_vacuum_rank", cnt.vacuum == dims.vacuum, cnt.vacuum, dims.vacuum, 0, "both"))
        params = {"group": G.name, "route": route, "seed": seed}
        return report("qdouble", params, results, checks)

    emit(ctx, run_guarded(body, "qdouble", {"group": group_name, "route": route, "seed": seed}), started)


def _tee_regions(lat: Lattice, A):
    regs = [("disc2x2", rect_disc(lat, (0, 0), 2, 2)), ("disc3x2", rect_disc(lat, (0, 0), 3, 2))]
    if lat.Lx > 3 and lat.Ly > 3:
        regs.append(("disc3x3", rect_disc(lat, (0, 0), 3, 3)))
    regs.append((A.describe(), A.region))
    return regs


@main.command()
@click.option("--model", type=click.Choice(["toric", "trivial"]), default="toric", show_default=True)
@click.option("--lat", default="8x8", show_default=True)
@click.option("--annulus", default=None, help="x,y,W,H,wT annulus used for the fit and the tripartition.")
@click.option("--seed", type=int, default=0, show_default=True)
@output_options
@click.pass_context
def tee(ctx, model, lat, annulus, seed, out, no_timing):
    """Area-law fit, tripartition CMI and its margin over the invariant."""
    started = time.perf_counter()

    def body():
        geom = parse_lattice(lat)
        m = build_model(model, geom)
        A = parse_region(geom, annulus)
        choice = sectors.default_choice(m)
        state = sectors.state_group(m, choice)
        regs = _tee_regions(geom, A)
        fit = sectors.area_law_fit(m, choice, [r for _, r in regs])
        X, Y, Z = tripartition(A)
        cmi = sectors.cmi_bits(state, X, Y, Z)
        inv = sectors.invariant_bits(m, A, choice)
        margin = Fraction(cmi) - inv.value_bits
        results = {
            "fit": {
                "route": "stabilizer",
                "alpha": str(fit.alpha),
                "gamma_bits": str(fit.gamma),
                "residual": str(fit.residual),
                "rows": [{"region": name, "boundary": b, "components": c, "entropy_bits": s} for (name, _), (b, c, s) in zip(regs, fit.rows)],
            },
            "cmi_bits": {"route": "stabilizer", "value": cmi},
            "invariant_bits": {"route": "stabilizer", "value": str(inv.value_bits)},
            "margin_bits": str(margin),
        }
        checks = [
            check("fit_residual_zero", fit.residual == 0, str(fit.residual), "0", 0, "stabilizer"),
            check("cmi_at_least_invariant", margin >= 0, str(margin), ">=0", 0, "stabilizer"),
        ]
        params = {"model": model, "lat": lat, "annulus": A.describe(), "seed": seed}
        return report("tee", params, results, checks)

    emit(ctx, run_guarded(body, "tee", {"model": model, "lat": lat, "annulus": annulus, "seed": seed}), started)


def _circuit_case(args):
    model, lat, annulus, depth, seed, before = args
    geom = parse_lattice(lat)
    m = build_model(model, geom)
    A = parse_annulus(geom, annulus)
    c = circuits.random_circuit(geom, depth, seed)
    return circuits.invariance_test(m, A, c, before_bits=before).as_dict()


def _parse_depths(text: str) -> list[int]:
    try:
        depths = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValueError(f"bad depth list {text!r}") from exc
    if not depths or min(depths) < 0:
        raise ValueError("depths must be non-negative integers")
    return depths


@main.command()
@click.option("--model", type=click.Choice(["toric", "trivial"]), default="toric", show_default=True)
@click.option("--lat", default="26x26", show_default=True)
@click.option("--annulus", default="0,0,21,21,w7", show_default=True)
@click.option("--depth", "depth_text", default="1,2", show_default=True, help="Comma-separated circuit depths.")
@click.option("--seed", type=int, default=0, show_default=True, help="First circuit seed.")
@click.option("--seeds", type=int, default=20, show_default=True, help="Circuits per depth.")
@click.option("--route", type=click.Choice(["stabilizer", "dense", "both"]), default="stabilizer", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@output_options
@click.pass_context
def circuit(ctx, model, lat, annulus, depth_text, seed, seeds, route, jobs, fmt, out, no_timing):
    """Invariant before and after random Clifford circuits (width t vs t - r)."""
    started = time.perf_counter()

    def body():
        depths = _parse_depths(depth_text)
        if seeds < 0 or jobs < 1:
            raise ValueError("--seeds must be >= 0 and --jobs >= 1")
        results, checks = {}, []
        cases = []
        if route in ("stabilizer", "both"):
            geom = parse_lattice(lat)
            m = build_model(model, geom)
            A = parse_annulus(geom, annulus)
            for d in depths:
                if A.width - d < 2:
                    raise GeometryError(f"annulus width {A.width} leaves {A.width - d} < 2 after depth {d}")
            before = int(sectors.invariant_bits(m, A).value_bits)
            work = [(model, lat, annulus, d, s, before) for d in depths for s in range(seed, seed + seeds)]
            if jobs > 1 and len(work) > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    cases = list(pool.map(_circuit_case, work))
            else:
                cases = [_circuit_case(w) for w in work]
            results["geometry"] = {"t": A.width, "hole": [A.hole_w, A.hole_h], "outer": [A.outer_w, A.outer_h], "lattice": lat}
            results["cases"] = cases
            for cs in cases:
                checks.append(check(f"invariant_d{cs['depth']}_s{cs['seed']}", cs["pass"], cs["after_bits"], cs["before_bits"], 0, "stabilizer"))
        if route in ("dense", "both"):
            cc = capped_cylinder((2, 2, 2, 2))
            sm = build_model(model, cc)
            band = ring_annulus(cc, 1, 2, closed=False)
            gate = band.region.sites[:2]
            spot = oracle.haar_spot_check(sm, band, gate, seed)
            results["spot_check"] = {
                "route": "dense",
                "geometry": cc.describe(),
                "annulus": band.describe(),
                "gate_sites": list(gate),
                "before_bits": spot.before.relative_entropy_bits,
                "after_bits": spot.after.relative_entropy_bits,
                "abs_diff_bits": spot.difference,
            }
            checks.append(check("haar_gate_spot_check", spot.difference < SPOT_TOL, spot.difference, 0.0, SPOT_TOL, "dense"))
        params = {"model": model, "lat": lat, "annulus": annulus, "depths": depths, "seed": seed, "seeds": seeds, "route": route}
        return report("circuit", params, results, checks)

    rep = run_guarded(body, "circuit", {"model": model, "lat": lat, "annulus": annulus, "depths": depth_text, "seed": seed})
    text = None
    if fmt == "csv":
        text = rows_csv(rep["results"].get("cases", []), ["seed", "depth", "range", "annulus_before", "annulus_after", "before_bits", "after_bits", "pass"])
    emit(ctx, rep, started, text)


@main.command("fib")
@click.option("--n", "n_max", type=int, default=30, show_default=True, help="Largest block size in the sweep.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Accepted for uniformity; the counts are exact.")
@output_options
@click.pass_context
def fib_cmd(ctx, n_max, fmt, seed, out, no_timing):
    """Fibonacci fusion counts, channel ratios and their limit."""
    started = time.perf_counter()

    def body():
        if n_max < 2:
            raise ValueError("--n must be >= 2")
        sweep = fib.ratio_sweep(n_max)
        ident_ok = all(fib.dimension_identity(a, b) for a in range(1, n_max + 1) for b in range(1, n_max + 1))
        tree_n = min(n_max, 12)
        tree_ok = all(
            len(fib.fusion_trees(n, q)) == fib.fusion_dim(n, q) for n in range(1, tree_n + 1) for q in (fib.IOTA, fib.TAU)
        )
        phi2 = fib.PHI**2
        limit = fib.asymptotic_invariant_bits()
        checks = [
            check("dimension_identity", ident_ok, ident_ok, True, 0, "exact"),
            check("fusion_trees_match", tree_ok, tree_ok, True, 0, "exact"),
        ]
        results = {"sweep": sweep, "asymptote_bits": limit, "identity_checked_to": n_max, "trees_checked_to": tree_n}
        if n_max >= 20:
            r = abs(float(fib.tau_sector_ratio(20, 20)) - phi2)
            t = abs(float(fib.total_ratio(20, 20)) - (1 + phi2))
            checks.append(check("ratio_20_near_phi2", r < 1e-7, r, 0.0, 1e-7, "exact"))
            checks.append(check("total_ratio_20_near_1_plus_phi2", t < 1e-7, t, 0.0, 1e-7, "exact"))
        if n_max >= 25:
            g = abs(math.log2(fib.total_ratio(25, 25)) - limit)
            checks.append(check("log2_total_ratio_25", g < 1e-8, g, 0.0, 1e-8, "exact"))
        return report("fib", {"n": n_max, "seed": seed}, results, checks)

    rep = run_guarded(body, "fib", {"n": n_max, "seed": seed})
    text = rows_csv(rep["results"].get("sweep", []), ["n", "ratio", "abs_err"]) if fmt == "csv" else None
    emit(ctx, rep, started, text)


if __name__ == "__main__":  # pragma: no cover
    main()
