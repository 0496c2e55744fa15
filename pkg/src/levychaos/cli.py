"""Command-line front end.

Subcommands: coeffs, expand, ortho, simulate, verify, convergence,
exact-verify, taylor.  Outputs are CSV (LF line endings, '.' decimal
separator, header row) or JSON (UTF-8, stable key order); floats use the
shortest round-trip representation, so identical configs produce
byte-identical artifacts.  Output files are written to a temporary sibling
and atomically renamed; error paths never leave partial files.  Errors exit
nonzero with machine-readable JSON on stderr.

LEVY_CHAOS_KMAX overrides the order cap (default 12; float-mode
orthogonalization stays capped at 8).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from . import combinatorics as comb
from .chaos import (
    c_poly_recursive,
    expand,
    expansion_csv_rows,
    expansion_to_json_dict,
    jamshidian_expand,
    pi_coeff,
    scalar_to_json,
)
from .errors import ConfigError, LevyChaosError
from .evaluate import (
    diff_csv_rows,
    exact_identity_suite,
    report_to_json_dict,
    verify_grid,
    verify_grid_sweep,
)
from .models import moments, parse_model, sigma_adjust
from .ortho import FLOAT_ORDER_CAP, orthogonalize, ortho_to_json_dict, to_h_basis
from .paths import grid_csv_rows, simulate_grid
from .taylor import eval_functional, functional_from_json, model_jump_fixtures


def _k_max() -> int:
    raw = os.environ.get("LEVY_CHAOS_KMAX")
    if raw is None:
        return comb.DEFAULT_ORDER_CAP
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"LEVY_CHAOS_KMAX must be an integer, got {raw!r}")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".levychaos-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _require(args, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ConfigError(f"missing required options: {', '.join('--' + n for n in missing)}")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_coeffs(args) -> None:
    _require(args, ["model", "n"])
    model = parse_model(args.model)
    exact = args.mode == "rational"
    n = args.n
    mv = sigma_adjust(moments(model, max(n, 2), exact=exact))
    cache: dict = {}
    c_list = [c_poly_recursive(k, mv) for k in range(n + 1)]
    pis = [(theta, pi_coeff(theta, n, mv, cache)) for theta in comb.index_set(n, k_max=_k_max())]
    if args.format == "json":
        payload = {
            "order": n,
            "mode": args.mode,
            "model": args.model,
            "sigma_adjusted": True,
            "c": [[scalar_to_json(x) for x in p.coeffs] for p in c_list],
            "pi": [{"tuple": list(t), "poly": [scalar_to_json(x) for x in p.coeffs]} for t, p in pis],
        }
        _emit(_json_text(payload), args.out)
    else:
        rows = [["kind", "index", "coeffs"]]
        for k, p in enumerate(c_list):
            rows.append(["C", str(k), " ".join(str(scalar_to_json(x)) for x in p.coeffs)])
        for t, p in pis:
            rows.append(["Pi", " ".join(map(str, t)), " ".join(str(scalar_to_json(x)) for x in p.coeffs)])
        _emit(_csv_text(rows), args.out)


def _cmd_expand(args) -> None:
    _require(args, ["n"])
    basis = args.basis
    if basis == "jamshidian":
        exp = jamshidian_expand(args.n, k_max=_k_max())
    else:
        _require(args, ["model"])
        model = parse_model(args.model)
        exp = expand(args.n, model, exact=args.mode == "rational", k_max=_k_max())
        if basis == "h":
            ortho = orthogonalize(model, args.n, exact=args.mode == "rational")
            exp = to_h_basis(exp, ortho)
    if args.format == "csv":
        _emit(_csv_text(expansion_csv_rows(exp)), args.out)
    else:
        _emit(_json_text(expansion_to_json_dict(exp)), args.out)


def _cmd_ortho(args) -> None:
    _require(args, ["model", "order"])
    model = parse_model(args.model)
    exact = args.mode == "rational"
    if not exact and args.order > FLOAT_ORDER_CAP:
        raise ConfigError(f"float-mode orthogonalization capped at {FLOAT_ORDER_CAP}")
    ortho = orthogonalize(model, args.order, exact=exact)
    if args.format == "csv":
        rows = [["array", "row", "entries"]]
        for name, tri in (("a", ortho.a), ("b", ortho.b)):
            for i, row in enumerate(tri, start=1):
                rows.append([name, str(i), " ".join(str(scalar_to_json(x)) for x in row)])
        rows.append(["eta", "", " ".join(str(scalar_to_json(x)) for x in ortho.mu)])
        _emit(_csv_text(rows), args.out)
    else:
        _emit(_json_text(ortho_to_json_dict(ortho)), args.out)


def _cmd_simulate(args) -> None:
    _require(args, ["model", "t", "dt"])
    if args.mode == "rational":
        raise ConfigError("rational mode forbids simulation commands")
    model = parse_model(args.model)
    path = simulate_grid(model, float(args.t), float(args.dt), float(args.t0), args.seed)
    _emit(_csv_text(grid_csv_rows(path)), args.out)


def _cmd_verify(args) -> None:
    _require(args, ["model", "n", "t", "dt"])
    if args.mode == "rational":
        raise ConfigError("rational mode forbids simulation commands")
    model = parse_model(args.model)
    report = verify_grid(
        model, args.n, float(args.t0), float(args.t), float(args.dt), args.seed, k_max=_k_max()
    )
    if args.out:
        _atomic_write(args.out, _csv_text(diff_csv_rows(report)))
    sys.stdout.write(_json_text(report_to_json_dict(report)))


def _cmd_convergence(args) -> None:
    _require(args, ["model", "n", "t", "dt_list"])
    if args.mode == "rational":
        raise ConfigError("rational mode forbids simulation commands")
    model = parse_model(args.model)
    dts = [float(x) for x in args.dt_list.split(",") if x.strip()]
    if not dts:
        raise ConfigError("empty --dt-list")
    reports = verify_grid_sweep(model, args.n, float(args.t0), float(args.t), dts, args.seed, k_max=_k_max())
    rows = [["dt", "t0_used", "max_abs_diff", "terminal_diff"]]
    for dt, report in zip(dts, reports):
        rows.append([repr(dt), repr(report.t0), repr(report.max_abs_diff), repr(report.terminal_diff)])
    _emit(_csv_text(rows), args.out)


def _cmd_exact_verify(args) -> None:
    _require(args, ["n"])
    reports = exact_identity_suite(
        args.count,
        args.n,
        args.seed,
        max_jumps=args.max_jumps,
        float_mode=args.mode == "float",
        k_max=_k_max(),
    )
    worst = max((abs(r.terminal_diff) for r in reports), default=0)
    payload = {
        "count": args.count,
        "n_max": args.n,
        "mode": args.mode,
        "seed": args.seed,
        "checks": len(reports),
        "max_abs_terminal_diff": scalar_to_json(float(worst) if args.mode == "float" else worst),
        "all_exact_zero": all(r.terminal_diff == 0 for r in reports),
    }
    _emit(_json_text(payload), args.out)


def _cmd_taylor(args) -> None:
    _require(args, ["spec", "model"])
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec_data = json.load(fh)
    model = parse_model(args.model)
    orders = [int(x) for x in args.orders.split(",") if x.strip()]
    rows = [["order", "paths", "substrate", "mean_abs_error", "max_abs_error"]]
    if args.dt is not None:
        batch = [
            simulate_grid(model, spec_data["grid"][-1], float(args.dt), 0.0, args.seed, i)
            for i in range(args.paths)
        ]
        substrate = "grid"
    else:
        batch = model_jump_fixtures(model, spec_data["grid"][-1], args.paths, args.seed)
        substrate = "exact"
    for D in orders:
        spec = functional_from_json({**spec_data, "order": D})
        report = eval_functional(spec, batch, model, k_max=_k_max())
        rows.append([str(D), str(args.paths), substrate, repr(report.mean_abs_error), repr(report.max_abs_error)])
    _emit(_csv_text(rows), args.out)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levychaos",
        description="Chaos-expansion coefficients for powers of Levy increments, with pathwise verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, sim=False):
        p.add_argument("--model", help="model string, e.g. brownian:sigma=0.01+gamma:a=10,b=20")
        p.add_argument("--mode", choices=["float", "rational"], default="float")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", help="output file (atomic write); stdout if omitted")
        p.add_argument("--config", help="JSON file supplying defaults for any option")
        if sim:
            p.add_argument("--t0", default="0", help="window start time (grid-aligned)")
            p.add_argument("--t", help="window end time")
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("coeffs", help="constant and integral coefficient tables")
    common(p)
    p.add_argument("--n", type=int)
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("expand", help="full expansion in a chosen basis")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--basis", choices=["y", "h", "jamshidian"], default="y")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("ortho", help="orthogonalization coefficient tables")
    common(p)
    p.add_argument("--order", type=int)
    p.set_defaults(func=_cmd_ortho)

    p = sub.add_parser("simulate", help="sample one grid path to CSV")
    common(p, sim=True)
    p.add_argument("--dt", type=float)
    p.set_defaults(func=_cmd_simulate, format="csv")

    p = sub.add_parser("verify", help="grid verification; diff CSV + report JSON")
    common(p, sim=True)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("convergence", help="max-diff table over a dt sweep")
    common(p, sim=True)
    p.add_argument("--n", type=int)
    p.add_argument("--dt-list", dest="dt_list", help="comma-separated steps, e.g. 1e-2,1e-3,1e-4")
    p.set_defaults(func=_cmd_convergence, format="csv")

    p = sub.add_parser("exact-verify", help="exact identity on random jump fixtures")
    common(p)
    p.add_argument("--n", type=int, help="check all orders 1..n")
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--max-jumps", dest="max_jumps", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_exact_verify, mode="rational")

    p = sub.add_parser("taylor", help="truncation study for a functional spec")
    common(p, sim=True)
    p.add_argument("--spec", help="FunctionalSpec JSON file")
    p.add_argument("--orders", default="2,4,6,8")
    p.add_argument("--paths", type=int, default=32)
    p.add_argument("--dt", type=float, help="use the grid substrate with this step")
    p.set_defaults(func=_cmd_taylor, format="csv")

    return parser


def _inject_config(argv: list[str]) -> list[str]:
    """Expand --config file.json into CLI tokens placed before explicit flags.

    Later occurrences win in argparse, so flags given on the command line
    override config values.
    """
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return argv
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("--config must hold a JSON object")
    injected: list[str] = []
    for key, value in data.items():
        injected.extend([f"--{key}", str(value)])
    return [argv[0]] + injected + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = _build_parser()
        args = parser.parse_args(_inject_config(argv))
        args.func(args)
    except LevyChaosError as exc:
        sys.stderr.write(_json_text({"error": exc.code, "message": str(exc)}))
        return 1
    except OSError as exc:
        sys.stderr.write(_json_text({"error": "io", "message": str(exc)}))
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
