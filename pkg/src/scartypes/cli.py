"""Unified command-line driver with JSON reports and CSV series output.

Subcommands: decompose, classify, scan-classes, variance, droplet, mps.
Every JSON report embeds the parsed configuration, the seed and the
library version ("schema": 1) so runs are reproducible byte for byte.
Exit codes: 0 success, 2 precondition failure, 3 indeterminate
classification, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, boundary, canonical, dynamics, mps, nullspace
from . import opspace, scars, states

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_INDETERMINATE = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_hamiltonian(spec: str, n_sites: int) -> opspace.LocalOperator:
    """Builtin name, name:key=value options, or a .op file path."""
    if os.path.exists(spec) or spec.endswith(".op"):
        with open(spec) as fh:
            return opspace.parse_operator(fh.read(), n_sites)
    name, _, arg_txt = spec.partition(":")
    kwargs = {}
    for pair in filter(None, arg_txt.split(",")):
        key, _, val = pair.partition("=")
        kwargs[key.strip()] = val if val.isalpha() else int(val)
    return canonical.builtin(name, n_sites, **kwargs)


def _emit(report: dict, args) -> None:
    report["schema"] = 1
    report["version"] = __version__
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable)
    if getattr(args, "out", None) and args.out != "csv":
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(f"{v:.12g}" if isinstance(v, float) else str(v)
                       for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_plot_blocks(path, blocks):
    """Gnuplot-ready data: '# label' headed blocks separated by blank lines."""
    chunks = []
    for label, rows in blocks:
        body = "\n".join(" ".join(f"{v:.12g}" for v in row) for row in rows)
        chunks.append(f"# {label}\n{body}")
    with open(path, "w") as fh:
        fh.write("\n\n".join(chunks) + "\n")


def _states_arg(names: str, n_sites: int):
    return [states.state_by_name(tok, n_sites) for tok in names.split(",")]


# -- subcommands ---------------------------------------------------------------

def _cmd_decompose(args) -> int:
    h = _load_hamiltonian(args.ham, args.N)
    try:
        form = canonical.decompose(h)
    except canonical.ClassificationError as exc:
        _emit({"error": str(exc), "config": _config(args)}, args)
        return EXIT_PRECONDITION
    _emit({
        "config": _config(args),
        "Omega": form.omega_id,
        "omega": complex(form.omega_n),
        "t": form.t_im,
        "annihilator_count": len(form.annihilators),
        "residual": form.residual_norm,
    }, args)
    return EXIT_OK


def _cmd_classify(args) -> int:
    h = _load_hamiltonian(args.ham, args.N)
    psis = _states_arg(args.states, args.N)
    label = boundary.classify(h, psis, r_max_list=(args.Rmax,))
    _emit({
        "config": _config(args),
        "type": label.value,
        "evidence": [{"R_max": r, "patch_length": l,
                      "residual_general": g, "residual_hermitian": hh}
                     for r, l, g, hh in label.evidence],
        "notes": list(label.notes),
    }, args)
    return EXIT_INDETERMINATE if label.value == "indeterminate" else EXIT_OK


def _cmd_scan_classes(args) -> int:
    psis = _states_arg(args.states, args.N)
    try:
        res = nullspace.count_type_classes(args.N, args.R, args.Rp, psis,
                                           degenerate=args.degenerate)
    except (ValueError, opspace.CapacityError) as exc:
        _emit({"error": str(exc), "config": _config(args)}, args)
        return EXIT_PRECONDITION
    _emit({
        "config": _config(args),
        "N_II": res.n_ii,
        "N_III": res.n_iii,
        "dims": res.dims,
        "tol": res.tolerance,
    }, args)
    return EXIT_OK


def _cmd_variance(args) -> int:
    rng_seed = args.seed
    if args.scan == "q":
        def build(n):
            rng = np.random.default_rng(rng_seed)
            return canonical.random_type1(n, rng) + canonical.h_imhop(n) \
                if args.ham == "random" else _load_hamiltonian(args.ham, n)
        h = build(args.N)
        scan = scars.variance_scan_q(h, args.N, list(range(1, args.points + 1)))
    else:
        n_list = [int(x) for x in args.N_list.split(",")]

        def build(n):
            rng = np.random.default_rng(rng_seed)
            return canonical.random_type1(n, rng) + canonical.h_imhop(n) \
                if args.ham == "random" else _load_hamiltonian(args.ham, n)
        scan = scars.variance_scan_n(build, args.p, n_list)
    rows = [(float(c), float(e), float(v)) for c, e, v in scan.points]
    if args.csv:
        _write_csv(args.csv, ("control", "expectation", "variance"), rows)
    fit = None
    if scan.fit is not None:
        fit = {"exponent": scan.fit.exponent, "prefactor": scan.fit.prefactor,
               "stderr": scan.fit.stderr}
    _emit({"config": _config(args), "fit": fit, "points": rows}, args)
    return EXIT_OK


def _parse_dispersion(spec: str) -> dynamics.Dispersion:
    name, _, arg_txt = spec.partition(":")
    kwargs = {}
    for pair in filter(None, arg_txt.split(",")):
        key, _, val = pair.partition("=")
        kwargs[key.strip()] = float(val)
    name = name.lower()
    w = kwargs.get("w", 1.0)
    if name == "rehop":
        return dynamics.rehop(w)
    if name == "imhop":
        return dynamics.imhop(w)
    if name == "chop":
        return dynamics.chop(kwargs.get("a", 0.5), kwargs.get("b", 0.5), w)
    raise ValueError(f"unknown dispersion {spec!r}")


def _cmd_droplet(args) -> int:
    disp = _parse_dispersion(args.dispersion)
    run = dynamics.DropletRun(args.N, args.M, disp)
    rate = {"0": 0.0, "wt": disp.w,
            "bwt": disp.beta * disp.w}.get(args.G, None)
    if rate is None:
        shift = float(args.G)           # fixed translation of the reference
        g_of_t = lambda t: shift
    else:
        g_of_t = lambda t: rate * t
    times = np.linspace(0.0, args.tmax, args.steps + 1)
    # CSV goes to --csv, or to stdout when no JSON path was requested
    csv_target = args.csv if args.csv else "-"
    json_wanted = bool(args.out) and args.out != "csv"
    if args.observable == "occupations":
        rows = []
        blocks = []
        for t in times:
            occ = dynamics.occupations(run, t)
            rows.extend((float(t), j + 1, float(occ[j])) for j in range(args.N))
            blocks.append((f"t = {t:g}",
                           [(j + 1, float(occ[j])) for j in range(args.N)]))
        _write_csv(csv_target, ("t", "j", "n_j"), rows)
        if args.emit_plot:
            _write_plot_blocks(args.emit_plot, blocks)
    else:
        rows = []
        for t in times[1:]:
            ups = dynamics.upsilon_finite(run, t, g_of_t(t))
            rows.append((float(t), ups.real, ups.imag))
        _write_csv(csv_target, ("t", "ReUpsilon", "ImUpsilon"), rows)
        if args.emit_plot:
            _write_plot_blocks(args.emit_plot, [("upsilon", rows)])
    if json_wanted:
        _emit({"config": _config(args), "rows": len(rows)}, args)
    return EXIT_OK


def _load_complex_array(path: str) -> np.ndarray:
    """JSON tensor format: {"shape": [...], "data": [{"re":..,"im":..}, ...]}."""
    with open(path) as fh:
        payload = json.load(fh)
    flat = np.array([complex(z["re"], z.get("im", 0.0)) for z in payload["data"]])
    return flat.reshape(payload["shape"])


def _cmd_mps(args) -> int:
    tensor = {"aklt": mps.builtin_aklt, "ssh": mps.builtin_ssh}.get(args.tensor)
    if tensor is None:
        a = mps.MPSTensor(_load_complex_array(args.tensor))
    else:
        a = tensor()
    if args.tensor == "aklt":
        gen = mps.spin1_matrix(args.generator[-1])
    elif args.tensor == "ssh":
        gen = mps.ssh_sz_matrix()
    else:
        gen = _load_complex_array(args.generator)
    spectrum = mps.transfer_spectrum(a)
    r_inj = mps.injectivity_length(a)
    dense_sizes = (6,) if a.d ** 8 > mps.DENSE_MAX_DIM else (6, 8)
    label = mps.classify_symmetry_generator(a, gen, dense_sizes=dense_sizes)
    _emit({
        "config": _config(args),
        "rank_full": mps.is_full_rank(a),
        "transfer_eigenvalues": [complex(z) for z in spectrum],
        "injectivity_length": (r_inj if isinstance(r_inj, int)
                               else f"not injective up to {r_inj.max_block}"),
        "type": label.value,
        "residuals": [{"theta": t, "push_through": r, "nontrivial_V": nt}
                      for t, r, nt in label.evidence],
        "notes": list(label.notes),
    }, args)
    return EXIT_INDETERMINATE if label.value == "indeterminate" else EXIT_OK


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg.setdefault("seed", None)
    return cfg


def build_parser() -> _Parser:
    parser = _Parser(prog="scartypes",
                     description="Parent-Hamiltonian classification toolkit")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="canonical W-parent decomposition")
    p.add_argument("--ham", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("classify", help="boundary-action type classification")
    p.add_argument("--ham", required=True)
    p.add_argument("--states", default="vacuum,w")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--Rmax", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("scan-classes", help="type II/III equivalence-class counts")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--Rp", type=int, required=True)
    p.add_argument("--states", default="vacuum,w")
    p.add_argument("--degenerate", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_scan_classes)

    p = sub.add_parser("variance", help="asymptotic-scar variance scans")
    p.add_argument("--scan", choices=("q", "N"), required=True)
    p.add_argument("--ham", default="random")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--N", type=int, default=12)
    p.add_argument("--N-list", dest="N_list", default="8,10,12")
    p.add_argument("--points", type=int, default=4)
    p.add_argument("--csv", default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_variance)

    p = sub.add_parser("droplet", help="droplet quench dynamics")
    p.add_argument("--dispersion", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--tmax", type=float, default=100.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--G", default="0")
    p.add_argument("--observable", choices=("occupations", "upsilon"),
                   default="upsilon")
    p.add_argument("--csv", default=None)
    p.add_argument("--out")
    p.add_argument("--emit-plot", dest="emit_plot")
    p.set_defaults(func=_cmd_droplet)

    p = sub.add_parser("mps", help="MPS symmetry-generator classification")
    p.add_argument("--tensor", required=True)
    p.add_argument("--generator", default="sz")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_mps)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, KeyError, opspace.DimensionError,
            opspace.CapacityError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_PRECONDITION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
