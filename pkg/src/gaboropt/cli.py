"""Command-line front end.

Exit status is 0 on success, 2 for invalid input and 3 when a numerical
method fails (no frame, divergence, stalled search).
"""

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import io
from .dsp import ChirpedGaussianParams, gaussian_window
from .errors import NumericalError, ValidationError
from .gabor import Lattice, dgt, frame_bounds
from .lattice_adapt import adapted_lattice_real, rationalize_lattice
from .optimizers import (
    OptimConfig,
    entropy_concentration,
    lp_concentration,
    optimize_nonparametric,
    optimize_parametric,
    optimize_regularized,
)
from .pipeline import (
    AlternateConfig,
    InnerOptimizerError,
    TFRegion,
    alternate_optimize,
    extract_pattern,
    max_track,
)
from .render import RenderSpec, render_spectrogram
from .signals import KINDS, SignalSpec, gen_signal


class _ArgError(ValidationError):
    pass


def _ints(text, count, what):
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise _ArgError(f"{what} must be {count} comma-separated integers, got {text!r}") from None
    if len(vals) != count:
        raise _ArgError(f"{what} must be {count} comma-separated integers, got {text!r}")
    return vals


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise _ArgError(f"expected comma-separated numbers, got {text!r}") from None


def _load_signal(args):
    f = io.read_signal(args.signal)
    if str(args.signal).lower().endswith(".wav") and args.out:
        _, rate = io.read_wav(args.signal)
        io.write_sidecar(args.out, sample_rate=rate, source=str(args.signal))
    return f


def _lattice(args, N):
    if args.lattice is None:
        raise _ArgError("--lattice a,b,s is required")
    a, b, s = _ints(args.lattice, 3, "--lattice")
    return Lattice(a, b, s, N)


def _region(args, N):
    if args.region is None:
        return TFRegion.whole(N)
    region = TFRegion(*_ints(args.region, 4, "--region"))
    region.validate(N)
    return region


def _window(args, N):
    if getattr(args, "window", None):
        g = io.read_signal(args.window)
        if g.size != N:
            raise _ArgError(f"window length {g.size} does not match signal length {N}")
        return g
    return gaussian_window(ChirpedGaussianParams(args.sigma, args.chirp), N)


def _optim(args):
    cfg = OptimConfig.from_file(args.config) if args.config else OptimConfig()
    if args.p is not None:
        cfg = replace(cfg, p=args.p)
    return cfg


def _emit(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args):
    spec = SignalSpec(
        kind=args.kind,
        N=args.n,
        f_start=args.f_start,
        f_stop=args.f_stop,
        **({"a": tuple(_floats(args.tones))} if args.tones else {}),
        b=args.mod_depth,
        c=args.mod_rate,
        theta=args.theta,
        sigma=args.sigma,
        s=args.chirp,
        t0=args.t0,
        f0=args.f0,
        noise=args.noise,
        seed=args.seed,
    )
    io.write_signal_csv(gen_signal(spec), args.out)


def cmd_dgt(args):
    f = _load_signal(args)
    lattice = _lattice(args, f.size)
    c = dgt(f, _window(args, f.size), lattice)
    io.write_coefficients(c, args.out)


def cmd_optimize_window(args):
    f = _load_signal(args)
    N = f.size
    lattice = _lattice(args, N)
    cfg = _optim(args)
    if args.region:
        f = extract_pattern(f, _window(args, N), lattice, _region(args, N))
    if args.method == "nonparam":
        g, trace = optimize_nonparametric(f, lattice, cfg)
    elif args.method == "param":
        start = ChirpedGaussianParams(args.sigma, args.chirp)
        params, trace = optimize_parametric(f, lattice, cfg, start)
        g = gaussian_window(params, N)
        sys.stdout.write(json.dumps({"sigma": params.sigma, "s": params.s}) + "\n")
    else:
        if args.lam is not None:
            cfg = replace(cfg, lam=args.lam)
        h = io.read_signal(args.reference) if args.reference else _window(args, N)
        h = h / np.linalg.norm(h)
        g, trace = optimize_regularized(f, lattice, h, cfg)
    io.write_signal_csv(g, args.out)
    if args.trace:
        trace.write_csv(args.trace)


def cmd_adapt_lattice(args):
    if args.n is None:
        raise _ArgError("--n is required")
    if args.redundancy is None:
        raise _ArgError("--redundancy is required")
    M = adapted_lattice_real(ChirpedGaussianParams(args.sigma, args.chirp), args.n, args.redundancy)
    lattice = rationalize_lattice(M, args.n)
    if args.matrix_out:
        io.write_generator_json(M, args.matrix_out)
    if args.out:
        io.write_lattice_json(lattice, args.out)
    else:
        _emit(lattice.to_dict(), None)


def cmd_alternate(args):
    f = _load_signal(args)
    N = f.size
    if args.redundancy is None:
        raise _ArgError("--redundancy is required")
    cfg = AlternateConfig(
        initial_lattice=_lattice(args, N),
        redundancy=args.redundancy,
        max_rounds=args.max_rounds,
        optim=_optim(args),
        method=args.method,
        start=ChirpedGaussianParams(args.sigma, args.chirp),
    )
    result = alternate_optimize(f, cfg)
    io.write_signal_csv(result.window, args.out)
    if args.trace:
        result.write_csv(args.trace)
    if args.lattice_out:
        io.write_lattice_json(result.lattice, args.lattice_out)
    summary = {"status": result.status, "rounds": len(result.rounds), "lattice": result.lattice.to_dict()}
    if result.cycle:
        summary["cycle"] = [lat.to_dict() for lat in result.cycle]
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")


def cmd_extract(args):
    f = _load_signal(args)
    N = f.size
    h = extract_pattern(f, _window(args, N), _lattice(args, N), _region(args, N), center=not args.no_center)
    io.write_signal_csv(h, args.out)


def cmd_metrics(args):
    f = _load_signal(args)
    N = f.size
    lattice = _lattice(args, N)
    g = _window(args, N)
    if args.region:
        f = extract_pattern(f, g, lattice, _region(args, N))
    c = dgt(f, g, lattice)
    p = args.p if args.p is not None else 4.0
    m = max_track(c)
    report = {
        "p": p,
        "lp": lp_concentration(c, p),
        "entropy": entropy_concentration(c),
        "max_m": float(m.max()),
        "mean_m": float(m.mean()),
        "lattice": lattice.to_dict(),
    }
    if args.frame:
        fb = frame_bounds(g, lattice)
        report.update(A=fb.A, B=fb.B, condition=fb.condition)
    _emit(report, args.out)


def cmd_render(args):
    if args.coeffs:
        c = io.read_coefficients(args.coeffs)
    else:
        f = _load_signal(args)
        c = dgt(f, _window(args, f.size), _lattice(args, f.size))
    render_spectrogram(c, RenderSpec(args.range), args.out)


def _shared():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--n", type=int, help="signal length")
    p.add_argument("--lattice", help="lattice as a,b,s")
    p.add_argument("--p", type=float, help="concentration exponent (> 2)")
    p.add_argument("--redundancy", type=float, help="target redundancy R")
    p.add_argument("--region", help="time-frequency box tmin,tmax,fmin,fmax")
    p.add_argument("--config", help="optimiser settings (JSON or TOML)")
    p.add_argument("--seed", type=int, help="seed for random noise")
    p.add_argument("--out", help="output path")
    return p


def _window_flags(p):
    p.add_argument("--window", help="window file (CSV or WAV); default is a Gaussian")
    p.add_argument("--sigma", type=float, default=1.0, help="Gaussian width (default 1)")
    p.add_argument("--chirp", type=float, default=0.0, help="Gaussian chirp parameter (default 0)")


def build_parser():
    shared = _shared()
    parser = argparse.ArgumentParser(prog="gaboropt", description="Gabor analysis with optimised windows.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[shared], help="generate a synthetic signal")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--f-start", type=float, default=32.0, help="quadchirp start frequency (bins)")
    p.add_argument("--f-stop", type=float, default=288.0, help="quadchirp stop frequency (bins)")
    p.add_argument("--tones", help="multitone carriers a_i (radians/sample), comma-separated")
    p.add_argument("--mod-depth", type=float, default=40.0, help="multitone modulation depth b")
    p.add_argument("--mod-rate", type=float, default=2 * np.pi / 1024, help="multitone modulation rate c")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--chirp", type=float, default=0.0)
    p.add_argument("--t0", type=int, default=0)
    p.add_argument("--f0", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.set_defaults(func=cmd_gen, n=1024)

    p = sub.add_parser("dgt", parents=[shared], help="compute Gabor coefficients")
    p.add_argument("signal")
    _window_flags(p)
    p.set_defaults(func=cmd_dgt)

    p = sub.add_parser("optimize-window", parents=[shared], help="optimise the analysis window")
    p.add_argument("signal")
    p.add_argument("--method", choices=("nonparam", "param", "reg"), default="nonparam")
    p.add_argument("--reference", help="reference window for --method reg")
    p.add_argument("--lam", type=float, help="regularisation weight for --method reg")
    p.add_argument("--trace", help="write the iteration trace as CSV")
    _window_flags(p)
    p.set_defaults(func=cmd_optimize_window)

    p = sub.add_parser("adapt-lattice", parents=[shared], help="lattice adapted to a chirped Gaussian")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--chirp", type=float, default=0.0)
    p.add_argument("--matrix-out", help="write the real generator matrix as JSON")
    p.set_defaults(func=cmd_adapt_lattice)

    p = sub.add_parser("alternate", parents=[shared], help="alternate window and lattice optimisation")
    p.add_argument("signal")
    p.add_argument("--method", choices=("param", "nonparam"), default="param")
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--sigma", type=float, default=1.0, help="starting width")
    p.add_argument("--chirp", type=float, default=0.0, help="starting chirp parameter")
    p.add_argument("--trace", help="write the round trace as CSV")
    p.add_argument("--lattice-out", help="write the final lattice as JSON")
    p.set_defaults(func=cmd_alternate)

    p = sub.add_parser("extract", parents=[shared], help="extract a pattern from a TF region")
    p.add_argument("signal")
    p.add_argument("--no-center", action="store_true", help="skip TF-centring of the result")
    _window_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("metrics", parents=[shared], help="concentration metrics as JSON")
    p.add_argument("signal")
    p.add_argument("--frame", action="store_true", help="also report frame bounds")
    _window_flags(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("render", parents=[shared], help="render a spectrogram image (PGM or PNG)")
    p.add_argument("signal", nargs="?")
    p.add_argument("--coeffs", help="coefficient CSV written by dgt")
    p.add_argument("--range", type=float, default=60.0, help="dynamic range in dB")
    _window_flags(p)
    p.set_defaults(func=cmd_render)
    return parser


_OUTPUT_REQUIRED = {"gen", "dgt", "optimize-window", "alternate", "extract", "render"}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in _OUTPUT_REQUIRED and not args.out:
            raise _ArgError("--out is required")
        if args.command == "render" and not (args.coeffs or args.signal):
            raise _ArgError("render needs a signal or --coeffs")
        args.func(args)
    except InnerOptimizerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3 if isinstance(exc.cause, NumericalError) else 2
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
