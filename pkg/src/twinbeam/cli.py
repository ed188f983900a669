"""Command-line front end: sweeps, figure datasets, oracle queries, exports.

Every run is deterministic (there is no randomness in the package), so
identical configurations produce byte-identical files.  Exit codes:
0 success, 2 validation error, 3 numerical-convergence or truncation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .conditional import conditional_state
from .fock import (FockOperator, TruncationConfig, TwinBeamParams, TruncationError,
                   coherent_state, moments, number_state, squeezed_state,
                   thermal_state, twb_entanglement)
from .oracles import (binned_squeezing, binned_squeezing_scale, click_probability,
                      conditional_photon_number, conditional_squeezing, energy_average,
                      homodyne_matrix_element, homodyne_stats, onoff_fano,
                      onoff_s_wigner_origin, onoff_wigner_origin)
from .phasespace import PhaseGrid, wigner_map
from .povm import onoff_povm
from .quadrature import ConvergenceError, legendre_line
from .teleport import (ChannelParams, effective_K, evolve_twb_loss, nonlocality_bound,
                       teleport_state, teleport_via_conditioning)

DEFAULT_TAIL = 1e-10


# ---------------------------------------------------------------------------
# output plumbing


def _resolve_output(path: str | None):
    if path is None or path == "-":
        return None
    if not os.path.isabs(path):
        outdir = os.environ.get("TWINBEAM_OUTDIR")
        if outdir:
            path = os.path.join(outdir, path)
    return path


def _provenance(command: str, params: dict, dim: int | None) -> dict:
    prov = {"generator": f"twinbeam {__version__}", "command": command,
            "tail_tolerance": DEFAULT_TAIL}
    if dim is not None:
        prov["dim"] = dim
    prov["params"] = {k: v for k, v in sorted(params.items())}
    return prov


def _emit_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_csv(header: list[str], rows, prov: dict, path: str | None) -> None:
    buf = io.StringIO()
    for key, val in prov.items():
        buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def _matrix_rows(matrix: np.ndarray):
    for n in range(matrix.shape[0]):
        for m in range(matrix.shape[1]):
            v = matrix[n, m]
            yield [n, m, float(v.real), float(v.imag)]


def _pick_dim(n_total: float, override: int | None, extra: int = 8) -> TruncationConfig:
    if override is not None:
        return TruncationConfig(override, DEFAULT_TAIL)
    return TruncationConfig.for_twin_beam(n_total, DEFAULT_TAIL, extra=extra)


def _parse_state(spec: str, trunc: TruncationConfig) -> FockOperator:
    kind, _, rest = spec.partition(":")
    args = [float(v) for v in rest.split(",")] if rest else []
    if kind == "vacuum":
        return number_state(0, trunc)
    if kind == "fock":
        return number_state(int(args[0]), trunc)
    if kind == "coherent":
        re = args[0] if args else 0.0
        im = args[1] if len(args) > 1 else 0.0
        return coherent_state(complex(re, im), trunc)
    if kind == "thermal":
        return thermal_state(args[0], trunc)
    if kind == "squeezed":
        zeta = args[0] if args else 0.0
        re = args[1] if len(args) > 1 else 0.0
        im = args[2] if len(args) > 2 else 0.0
        return squeezed_state(complex(re, im), zeta, trunc)
    if kind == "onoff":
        twb = TwinBeamParams.from_mean_photons(args[0])
        _, pi1 = onoff_povm(args[1], trunc)
        return conditional_state(twb, pi1).state
    if kind == "homodyne":
        from .povm import homodyne_povm
        twb = TwinBeamParams.from_mean_photons(args[0])
        el = homodyne_povm(args[2], args[1], trunc)
        return conditional_state(twb, el).state
    raise ValueError(f"unknown state spec {spec!r}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_onoff(args) -> int:
    twb = TwinBeamParams.from_mean_photons(args.N)
    trunc = _pick_dim(args.N, args.dim)
    _, pi1 = onoff_povm(args.eta, trunc)
    res = conditional_state(twb, pi1)
    mom = moments(res.state)
    payload = {
        "click_probability": click_probability(args.N, args.eta),
        "fano": onoff_fano(args.N, args.eta),
        "wigner_origin": onoff_wigner_origin(args.N, args.eta),
        "mean_photon": mom.mean_photon,
        "entanglement": twb_entanglement(twb),
    }
    if args.s_points:
        ss = np.linspace(-0.99, -0.99 / args.s_points, args.s_points)
        payload["s_ordered"] = [[float(s), onoff_s_wigner_origin(args.N, args.eta, float(s))]
                                for s in ss]
    prov = _provenance("onoff", {"N": args.N, "eta": args.eta}, trunc.dim)
    path = _resolve_output(args.output)
    if args.format == "json":
        _emit_json({"provenance": prov, "result": payload}, path)
    else:
        rows = [[k, v] for k, v in payload.items() if not isinstance(v, list)]
        _emit_csv(["quantity", "value"], rows, prov, path)
    return 0


def _cmd_homodyne(args) -> int:
    trunc = _pick_dim(args.N, args.dim, extra=32)
    prov = _provenance("homodyne", {"N": args.N, "eta": args.eta, "x": args.x,
                                    "max_n": args.max_n}, trunc.dim)
    size = args.max_n + 1
    mat = np.array([[homodyne_matrix_element(n, m, args.x, args.N, args.eta)
                     for m in range(size)] for n in range(size)], dtype=complex)
    path = _resolve_output(args.output)
    if args.format == "json":
        _emit_json({"provenance": prov,
                    "matrix": [[[v.real, v.imag] for v in row] for row in mat]}, path)
    else:
        _emit_csv(["n", "m", "re", "im"], _matrix_rows(mat), prov, path)
    return 0


def _sweep_row(task):
    x, n_total, eta, delta = task
    stats = homodyne_stats(n_total, eta, delta)
    rep = binned_squeezing(x, n_total, eta, delta)
    return [x, float(stats.density_binned(x)), rep.var_x_delta, int(rep.is_squeezed)]


def _cmd_sweep_squeezing(args) -> int:
    stats = homodyne_stats(args.N, args.eta, args.delta)
    rep = binned_squeezing(0.0, args.N, args.eta, args.delta)
    x_max = args.x_max if args.x_max is not None else 6.0 * np.sqrt(stats.delta_total_sq)
    xs = np.linspace(-x_max, x_max, args.points)
    tasks = [(float(x), args.N, args.eta, args.delta) for x in xs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    prov = _provenance("sweep-squeezing",
                       {"N": args.N, "eta": args.eta, "delta": args.delta,
                        "x_max": float(x_max), "points": args.points}, None)
    prov["x_delta"] = rep.x_delta
    prov["q_delta"] = rep.q_delta
    prov["g"] = rep.g
    _emit_csv(["x", "probability_density", "var_x", "squeezed"], rows, prov,
              _resolve_output(args.output))
    return 0


def _cmd_teleport(args) -> int:
    params = ChannelParams(N=args.N, gamma_t=args.gamma_t, M=args.M, eta=args.eta)
    k = effective_K(params)
    evolved = evolve_twb_loss(params)
    bound = nonlocality_bound(params)
    payload = {"K0": params.k0, "K": k, "fidelity_coherent": 1.0 / (1.0 + k),
               "bound_satisfied": bound.satisfied,
               "sigma_plus_sq": evolved.sigma_plus_sq,
               "sigma_minus_sq": evolved.sigma_minus_sq}
    trunc = _pick_dim(args.N, args.dim, extra=24)
    prov = _provenance("teleport", {"N": args.N, "gamma_t": args.gamma_t,
                                    "M": args.M, "eta": args.eta,
                                    "input": args.input}, trunc.dim)
    if args.state_out or args.check_pipeline:
        state = _parse_state(args.input, trunc)
        output = teleport_state(state, k, trunc)
        if args.state_out:
            _emit_csv(["n", "m", "re", "im"], _matrix_rows(output.matrix), prov,
                      _resolve_output(args.state_out))
        if args.check_pipeline:
            piped = teleport_via_conditioning(state, params, trunc)
            gap = np.linalg.eigvalsh(piped.matrix - output.matrix)
            payload["pipeline_trace_distance"] = float(np.abs(gap).sum() / 2.0)
    _emit_json({"provenance": prov, "result": payload}, _resolve_output(args.output))
    return 0


def _cmd_wigner_map(args) -> int:
    trunc = TruncationConfig(args.dim, DEFAULT_TAIL) if args.dim else \
        TruncationConfig(64, DEFAULT_TAIL)
    state = _parse_state(args.state, trunc)
    grid = PhaseGrid.centered(args.halfwidth, args.points, kind="uniform")
    vals = wigner_map(state, grid)
    xs, ys, _, _ = grid.axes()
    rows = ([float(x), float(y), float(vals[i, j])]
            for i, x in enumerate(xs) for j, y in enumerate(ys))
    prov = _provenance("wigner-map", {"state": args.state, "halfwidth": args.halfwidth,
                                      "points": args.points}, trunc.dim)
    _emit_csv(["x", "y", "W"], rows, prov, _resolve_output(args.output))
    return 0


_ORACLES = {
    "click_probability": (("N", "eta"), click_probability),
    "fano": (("N", "eta"), onoff_fano),
    "wigner_origin": (("N", "eta"), onoff_wigner_origin),
    "s_wigner_origin": (("N", "eta", "s"), onoff_s_wigner_origin),
    "g": (("N", "eta"), binned_squeezing_scale),
    "conditional_photon_number": (("x", "N"), conditional_photon_number),
    "energy_average": (("N",), energy_average),
    "entanglement": (("N",), lambda n: twb_entanglement(TwinBeamParams.from_mean_photons(n))),
    "variances": (("N", "eta", "delta"),
                  lambda n, e, d: homodyne_stats(n, e, d).delta_total_sq),
    "squeezing_var_x": (("x", "N", "eta"),
                        lambda x, n, e: conditional_squeezing(x, n, e).var_x),
    "x_delta": (("x", "N", "eta", "delta"),
                lambda x, n, e, d: binned_squeezing(x, n, e, d).x_delta),
    "q_delta": (("x", "N", "eta", "delta"),
                lambda x, n, e, d: binned_squeezing(x, n, e, d).q_delta),
}


def _parse_param_value(text: str) -> list[float]:
    if ":" in text:
        a, b, n = text.split(":")
        return [float(v) for v in np.linspace(float(a), float(b), int(n))]
    if "," in text:
        return [float(v) for v in text.split(",")]
    return [float(text)]


def _oracle_row(task):
    name, combo = task
    order, fn = _ORACLES[name]
    return list(combo) + [float(fn(*combo))]


def _cmd_oracle(args) -> int:
    if args.name not in _ORACLES:
        raise ValueError(f"unknown oracle {args.name!r}; "
                         f"known: {', '.join(sorted(_ORACLES))}")
    order, fn = _ORACLES[args.name]
    supplied = {}
    for key in ("N", "eta", "x", "delta", "s"):
        raw = getattr(args, key if key != "s" else "s_value")
        grid = getattr(args, f"{key}_grid", None)
        if grid is not None:
            supplied[key] = _parse_param_value(grid)
        elif raw is not None:
            supplied[key] = _parse_param_value(raw)
    missing = [k for k in order if k not in supplied]
    if missing:
        raise ValueError(f"oracle {args.name!r} needs parameters {missing}")
    # cartesian sweep in the declared parameter order
    combos = [[]]
    for key in order:
        combos = [c + [v] for c in combos for v in supplied[key]]
    tasks = [(args.name, tuple(c)) for c in combos]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_oracle_row, tasks))
    else:
        rows = [_oracle_row(t) for t in tasks]
    prov = _provenance("oracle", {"name": args.name,
                                  **{k: v for k, v in supplied.items()}}, None)
    path = _resolve_output(args.output)
    if args.format == "json":
        _emit_json({"provenance": prov, "columns": list(order) + [args.name],
                    "rows": rows}, path)
    else:
        _emit_csv(list(order) + [args.name], rows, prov, path)
    return 0


def _fig2_panel(task):
    x, eta, n_total, max_n = task
    size = max_n + 1
    return [[n, m, homodyne_matrix_element(n, m, x, n_total, eta), 0.0]
            for n in range(size) for m in range(size)]


def _cmd_figure(args) -> int:
    outdir = args.outdir or os.environ.get("TWINBEAM_OUTDIR") or "."
    os.makedirs(outdir, exist_ok=True)
    manifest = {"generator": f"twinbeam {__version__}", "figure": args.id}
    if args.id == 2:
        n_total, max_n = 1.0, 6
        panels = [(x, eta, n_total, max_n) for x in (0.0, 0.6) for eta in (1.0, 0.8, 0.4)]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_fig2_panel, panels))
        else:
            results = [_fig2_panel(p) for p in panels]
        files = []
        for (x, eta, _, _), rows in zip(panels, results):
            name = f"fig2_x{x:g}_eta{eta:g}.csv"
            prov = _provenance("figure", {"figure": 2, "x": x, "eta": eta,
                                          "N": n_total, "max_n": max_n}, None)
            _emit_csv(["n", "m", "re", "im"], rows, prov, os.path.join(outdir, name))
            files.append(name)
        manifest.update({"N": n_total, "max_n": max_n, "files": files})
    elif args.id == 3:
        n_total, eta, delta = 20.0, 0.7, 0.25
        stats = homodyne_stats(n_total, eta, delta)
        rep = binned_squeezing(0.0, n_total, eta, delta)
        xs = np.linspace(-15.0, 15.0, 601)
        rows = [[float(x), float(stats.density_binned(x))] for x in xs]
        prov = _provenance("figure", {"figure": 3, "N": n_total, "eta": eta,
                                      "delta": delta}, None)
        _emit_csv(["x", "probability_density"], rows, prov,
                  os.path.join(outdir, "fig3_density.csv"))
        nodes, weights = legendre_line(-rep.x_delta, rep.x_delta, 400)
        shaded = float(weights @ stats.density_binned(nodes))
        manifest.update({"N": n_total, "eta": eta, "delta": delta,
                         "x_delta": rep.x_delta, "q_delta": rep.q_delta,
                         "q_delta_quadrature": shaded,
                         "files": ["fig3_density.csv"]})
    elif args.id == 4:
        etas = np.linspace(0.501, 1.0, 100)
        ns = (1.0, 2.0, 5.0, 10.0)
        rows = [[float(e)] + [binned_squeezing_scale(n, float(e)) for n in ns]
                for e in etas]
        prov = _provenance("figure", {"figure": 4, "N_values": list(ns)}, None)
        _emit_csv(["eta"] + [f"g_N{n:g}" for n in ns], rows, prov,
                  os.path.join(outdir, "fig4_g.csv"))
        manifest.update({"N_values": list(ns), "files": ["fig4_g.csv"],
                         "ordering": "top to bottom: N=1,2,5,10"})
    else:
        raise ValueError(f"unknown figure id {args.id}; known: 2, 3, 4")
    with open(os.path.join(outdir, f"fig{args.id}_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twinbeam",
                                description="conditional state engineering on twin beams")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--output", default=None, help="output path ('-' = stdout)")
        if fmt:
            sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("onoff", help="click statistics and nonclassicality")
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--s-points", type=int, default=0)
    sp.add_argument("--dim", type=int, default=None)
    common(sp)
    sp.set_defaults(fn=_cmd_onoff)

    sp = sub.add_parser("homodyne", help="conditional-state matrix elements")
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--max-n", type=int, default=6)
    sp.add_argument("--dim", type=int, default=None)
    common(sp)
    sp.set_defaults(fn=_cmd_homodyne)
    sp.set_defaults(format="csv")

    sp = sub.add_parser("sweep-squeezing", help="binned squeezing across outcomes")
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--x-max", type=float, default=None)
    sp.add_argument("--points", type=int, default=241)
    sp.add_argument("--jobs", type=int, default=1)
    common(sp, fmt=False)
    sp.set_defaults(fn=_cmd_sweep_squeezing)

    sp = sub.add_parser("teleport", help="channel parameters and teleported states")
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--gamma-t", type=float, default=0.0)
    sp.add_argument("--M", type=float, default=0.0)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--input", default="vacuum")
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--state-out", default=None)
    sp.add_argument("--check-pipeline", action="store_true")
    common(sp, fmt=False)
    sp.set_defaults(fn=_cmd_teleport)

    sp = sub.add_parser("wigner-map", help="Wigner function on a grid")
    sp.add_argument("--state", required=True)
    sp.add_argument("--halfwidth", type=float, default=4.0)
    sp.add_argument("--points", type=int, default=81)
    sp.add_argument("--dim", type=int, default=None)
    common(sp, fmt=False)
    sp.set_defaults(fn=_cmd_wigner_map)

    sp = sub.add_parser("oracle", help="closed-form scalar sweeps")
    sp.add_argument("name")
    sp.add_argument("--N", default=None)
    sp.add_argument("--eta", default=None)
    sp.add_argument("--x", default=None)
    sp.add_argument("--delta", default=None)
    sp.add_argument("--s", dest="s_value", default=None)
    sp.add_argument("--N-grid", dest="N_grid", default=None)
    sp.add_argument("--eta-grid", dest="eta_grid", default=None)
    sp.add_argument("--x-grid", dest="x_grid", default=None)
    sp.add_argument("--delta-grid", dest="delta_grid", default=None)
    sp.add_argument("--s-grid", dest="s_grid", default=None)
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(fn=_cmd_oracle)
    sp.set_defaults(format="csv")

    sp = sub.add_parser("figure", help="datasets behind the reference figures")
    sp.add_argument("--id", type=int, required=True)
    sp.add_argument("--outdir", default=None)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(fn=_cmd_figure)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, TruncationError) as exc:
        print(f"twinbeam: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"twinbeam: numerical convergence failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
