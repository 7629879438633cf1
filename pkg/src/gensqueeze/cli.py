"""Command-line entry point: ``gensqueeze <command> [flags]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from .errors import FitError, GenSqueezeError, TailError, ValidationError
from .fockspace import Cutoff, Family, GeneratorSpec, SoftAnchor, build_generator, vacuum_state
from .io import RunManifest, to_jsonable, manifest_path, write_csv, write_json
from .phasespace import FieldKind, GridSpec, q_function, wigner_function
from .propagation import StepSchedule, evolve_spectral, trajectory_observables
from .reference import (
    ClassicalParams,
    ClassicalVariant,
    classical_trajectory,
    coherent_amplitudes,
    pn_mean_photon,
    squeezed_vacuum_mean_photon,
)
from .observables import mean_photon
from .scaling import (
    Quantity,
    SweepError,
    extrapolate_gap,
    fit_logarithmic,
    fit_power_law,
    sweep_gap,
    sweep_max_mean_photon,
)
from .spectral import (
    dominant_gap,
    eigenstate_distribution,
    eigenstate_mean_photon,
    top_pair_indices,
    vacuum_overlap_ranking,
    vacuum_spectrum,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
# two eigenstates "dominate" when their overlaps beat the next eight by this factor
DOMINANCE_RATIO = 10.0


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text):
    try:
        return GridSpec.parse(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_jobs():
    env = os.environ.get("SQZ_JOBS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _add_generator_flags(p, family=True):
    p.add_argument("--n", type=int, required=True, help="squeezing order")
    p.add_argument("--dim", type=int, required=True, help="Fock-space truncation N")
    p.add_argument("--cutoff", choices=[c.value for c in Cutoff], default="hard")
    if family:
        p.add_argument("--family", choices=[f.value for f in Family], default="standard")
    p.add_argument("--soft-anchor", choices=[a.value for a in SoftAnchor], default="row",
                   help="evaluate the soft-cutoff sine at the row k (default) or column k+n of H_{k,k+n}")


def _spec(args):
    family = getattr(args, "family", "standard")
    return GeneratorSpec(args.n, args.dim, Cutoff(args.cutoff), Family(family), SoftAnchor(args.soft_anchor))


def cmd_evolve(args):
    spec = _spec(args)
    tracked = args.track if args.track is not None else [0]
    schedule = StepSchedule(args.r_max, args.dr, args.record_every)
    traj = trajectory_observables(build_generator(spec), schedule, tracked, method=args.method)
    header = ["r"] + [f"P_{k}" for k in traj.tracked_k] + ["mean_photon", "vacuum_prob", "norm"]
    rows = [
        [traj.r_samples[i], *traj.occupations[i], traj.mean_photon[i], traj.vacuum_prob[i], traj.norm[i]]
        for i in range(len(traj))
    ]
    write_csv(args.out, header, rows)
    return [args.out], traj.max_norm_drift


def _dominance(probs):
    top2 = sum(probs[:2])
    rest = sum(probs[2:10])
    return bool(top2 > DOMINANCE_RATIO * rest)


def cmd_spectrum(args):
    spec = _spec(args)
    data = vacuum_spectrum(spec)
    ranking = vacuum_overlap_ranking(data, max(args.top, 10))
    probs = [p for _, p in ranking]
    a, b = top_pair_indices(data)
    pair = []
    for i in (a, b):
        pair.append({
            "eigenvalue": float(data.eigenvalues[i]),
            "vacuum_overlap": float(data.vacuum_overlap_probs[i]),
            "mean_photon": eigenstate_mean_photon(data, i),
            "distribution": [[k, p] for k, p in eigenstate_distribution(data, i)],
        })
    report = {
        "params": vars_for_manifest(args),
        "top_overlaps": [{"eigenvalue": e, "probability": p} for e, p in ranking[:args.top]],
        "dominant_gap": dominant_gap(data),
        "dominant_pair": pair,
        "symmetry_residual": data.symmetry_residual(),
        "two_state_dominance": _dominance(probs),
        "manifest": str(manifest_path(args.out)),
    }
    write_json(args.out, report)
    return [args.out], None


def _evolved_state(spec, r):
    gen = build_generator(spec)
    vac = vacuum_state(spec.dim)
    return vac if r == 0 else evolve_spectral(vac, gen, r)


def cmd_phasespace(args):
    spec = _spec(args)
    state = _evolved_state(spec, args.r)
    kind = FieldKind(args.function)
    try:
        field = q_function(state, args.grid) if kind is FieldKind.HUSIMI else wigner_function(state, args.grid)
    except TailError as exc:
        hint = "try a smaller --r or --dim" if kind is FieldKind.WIGNER else "try a smaller --grid, --r or --dim"
        raise TailError(f"{exc} ({hint})", exc.leaked_probability) from exc
    g = args.grid
    rows = [[x, p, field.values[i, j]] for i, p in enumerate(g.ps) for j, x in enumerate(g.xs)]
    write_csv(args.out, ["x", "p", "value"], rows)
    return [args.out], abs(state.norm - 1.0)


def _fit_json_path(out):
    return str(out) + ".fit.json"


def _fit_payload(fit):
    return {"model": fit.model.value, "parameters": fit.parameters, "r_squared": fit.r_squared,
            "residuals": [float(x) for x in fit.residuals]}


def cmd_scaling(args):
    quantity = Quantity(args.quantity)
    cutoff = Cutoff(args.cutoff)
    if quantity is Quantity.MAX_MEAN_PHOTON:
        points = sweep_max_mean_photon(args.n, args.dims, cutoff, args.r_max, args.dr, args.jobs)
    else:
        points = sweep_gap(args.n, args.dims, cutoff, args.jobs)
    header = ["n", "N", "value", "r_at_max"]
    write_csv(args.out, header, [[p.n, p.N, p.value, p.r_at_max] for p in points])
    outputs = [args.out]
    xy = [(p.N, p.value) for p in points]
    fit_out = _fit_json_path(args.out)
    payload = {"params": vars_for_manifest(args), "manifest": str(manifest_path(args.out))}
    try:
        if quantity is Quantity.MAX_MEAN_PHOTON:
            fits = [fit_power_law(xy), fit_logarithmic(xy)]
            best = max(fits, key=lambda f: f.r_squared)
            payload["fits"] = [_fit_payload(f) for f in fits]
            payload["preferred"] = best.model.value
        else:
            fit = extrapolate_gap(xy)
            payload["fits"] = [_fit_payload(fit)]
            payload["preferred"] = fit.model.value
            payload["period"] = math.tau / fit.parameters["asymptote"]
    except FitError as exc:
        payload["error"] = str(exc)
        if exc.residuals is not None:
            payload["residuals"] = [float(x) for x in exc.residuals]
        write_json(fit_out, payload)
        outputs.append(fit_out)
        exc.outputs = outputs
        raise
    write_json(fit_out, payload)
    outputs.append(fit_out)
    return outputs, None


def cmd_reference(args):
    model = args.model
    inputs = {k: v for k, v in vars_for_manifest(args).items() if v is not None}
    if model == "coherent":
        _require(args, "r")
        state = coherent_amplitudes(args.r, args.dim)
        result = {"mean_photon": mean_photon(state), "exact_mean_photon": args.r ** 2}
    elif model == "squeezed":
        _require(args, "r")
        result = {"mean_photon": squeezed_vacuum_mean_photon(args.r)}
    elif model == "pn":
        _require(args, "n", "r")
        result = {"mean_photon": pn_mean_photon(args.n, args.r)}
    else:
        _require(args, "n", "x0", "rate", "t")
        params = ClassicalParams(args.rate, args.x0, args.n)
        x = classical_trajectory(params, args.t, ClassicalVariant(args.variant))
        result = {"x": x, "divergence_time": params.divergence_time}
    payload = {"inputs": inputs, "result": result}
    if args.out:
        payload["manifest"] = str(manifest_path(args.out))
        write_json(args.out, payload)
        return [args.out], None
    print(json.dumps(to_jsonable(payload), indent=2))
    return [], None


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ValidationError(f"--model {args.model} needs {', '.join(missing)}")


def cmd_rerun(args):
    manifest = RunManifest.load(args.manifest)
    return main(manifest.argv)


def vars_for_manifest(args):
    out = {}
    for k, v in vars(args).items():
        if k in ("func", "command"):
            continue
        if isinstance(v, GridSpec):
            v = {"x_min": v.x_min, "x_max": v.x_max, "p_min": v.p_min, "p_max": v.p_max,
                 "points_per_axis": v.points_per_axis}
        out[k] = v
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="gensqueeze", description="Generalized squeezing in a truncated Fock space")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="evolve the vacuum and write a trajectory CSV")
    _add_generator_flags(p)
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--dr", type=float, default=0.01)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--track", type=_int_list, default=None, help="photon numbers, e.g. 0,3,6,9")
    p.add_argument("--method", choices=["auto", "stepwise", "spectral"], default="auto")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("spectrum", help="vacuum-subspace eigenanalysis as JSON")
    _add_generator_flags(p)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("phasespace", help="Q or Wigner function of the evolved vacuum as x,p,value CSV")
    _add_generator_flags(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--function", choices=[k.value for k in FieldKind], default="q")
    p.add_argument("--grid", type=_grid, default=GridSpec())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phasespace)

    p = sub.add_parser("scaling", help="sweep N and fit max photon number or the dominant gap")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--cutoff", choices=[c.value for c in Cutoff], default="hard")
    p.add_argument("--quantity", choices=[q.value for q in Quantity], required=True)
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--dr", type=float, default=0.01)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: $SQZ_JOBS or 1)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("reference", help="closed-form baselines as JSON")
    p.add_argument("--model", choices=["coherent", "squeezed", "pn", "classical"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--dim", type=int, default=1000, help="truncation for the coherent amplitudes")
    p.add_argument("--x0", type=float)
    p.add_argument("--rate", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--variant", choices=[v.value for v in ClassicalVariant], default="ode-exact")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_rerun)
    return parser


def _join_grid(argv):
    # a grid such as -5:5:201 starts with '-', which argparse would read as a flag
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--grid" and i + 1 < len(argv):
            out.append(f"--grid={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None):
    argv = _join_grid(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    if getattr(args, "jobs", 0) is None:
        args.jobs = _default_jobs()
    if args.command == "rerun":
        try:
            return cmd_rerun(args)
        except (OSError, ValueError, TypeError) as exc:
            print(f"error: cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_INVALID
    start = time.perf_counter()
    code = EXIT_OK
    outputs, drift = [], None
    try:
        outputs, drift = args.func(args)
    except (ValidationError, SweepError) as exc:
        cause = exc.cause if isinstance(exc, SweepError) else exc
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INVALID if isinstance(cause, ValidationError) else EXIT_NUMERICAL
    except GenSqueezeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        outputs = getattr(exc, "outputs", [])
        code = EXIT_NUMERICAL
    out = getattr(args, "out", None)
    if out and outputs:
        manifest = RunManifest(
            command=args.command,
            argv=argv,
            params=vars_for_manifest(args),
            duration_s=time.perf_counter() - start,
            max_norm_drift=drift,
            outputs=[str(o) for o in outputs],
        )
        manifest.write(manifest_path(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
