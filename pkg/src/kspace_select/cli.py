"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure
(divergence, empty support, degenerate evaluation region).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .errors import ComplexityError, DivergenceError, EmptySupportError, SizingError, UndefinedReferenceError
from .evaluation import (
    DETERMINISTIC,
    BenchmarkConfig,
    brute_force_optimal_mask,
    erec_direct,
    reconstruct,
    run_sequence_benchmark,
)
from .formats import atomic_write, dump_raw, load_raw, read_mask, write_mask
from .masks import (
    DEFAULT_DECAY,
    algo1_max_modulus,
    algo2_per_resolution,
    algo3_interference,
    algo4_influence,
    random_lowfreq_mask,
    support_from_image,
)
from .phantom import DynamicSequence, SequenceSpec, build_sequence, dump_sequence, load_sequence
from .recovery import RecoveryConfig, SensingOperator, iht, lcamp
from .transforms import dft2, dwt2, idwt2

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write(path, text.encode("ascii"))


def _sequence(cfg: ExperimentConfig) -> DynamicSequence:
    if cfg.sequence:
        return load_sequence(cfg.sequence)
    spec = SequenceSpec(n=cfg.n, frames=cfg.frames, tau=cfg.tau, snr_db=cfg.snr_db,
                        curve_sigma=cfg.curve_sigma, seed=cfg.seeds[0])
    return build_sequence(spec)


def _bench_config(cfg: ExperimentConfig, a: float = 1.0) -> BenchmarkConfig:
    return BenchmarkConfig(levels=cfg.levels, wavelet=cfg.wavelet, sparsity=cfg.sparsity or None,
                           cs_sparsity=cfg.cs_sparsity or None, a=a, fill=cfg.fill, decay=cfg.decay,
                           mask_seed=cfg.seeds[1], max_iters=cfg.max_iters, rel_tol=cfg.rel_tol,
                           algo4_method=cfg.algo4_method, workers=cfg.workers)


def _budget(fraction: float, total: int) -> int:
    return max(1, int(round(fraction * total)))


def _frac_tag(fraction: float) -> str:
    return f"{fraction!r}"


def _showcase(cfg: ExperimentConfig, seq: DynamicSequence) -> int:
    tau = seq.spec.tau if seq.spec is not None else cfg.tau
    if cfg.showcase_frame == "peak":
        # bolus peak among the undersampled frames
        return tau + int(np.argmax(seq.truth_curves.sum(axis=0)[tau:]))
    t = int(cfg.showcase_frame)
    if not tau <= t < len(seq.frames):
        raise UsageError(f"showcase frame {t} is not an undersampled frame ({tau}..{len(seq.frames) - 1})")
    return t


def _summary_table(rows, fractions) -> tuple[str, str]:
    """Methods down, measured fractions across: CSV and an aligned text table."""
    head = ["method"] + [f"{100 * f:g}%" for f in fractions]
    csv_lines = [",".join(head)]
    txt = ["Relative percent errors (ROI, sequence mean over undersampled frames)",
           "".join(f"{h:>10}" for h in head)]
    for method, values in rows:
        csv_lines.append(",".join([method] + [f"{v:.10g}" for v in values]))
        txt.append(f"{method:>10}" + "".join(f"{v:10.2f}" for v in values))
    return "\n".join(csv_lines) + "\n", "\n".join(txt) + "\n"


def _load_prior(path: str, tau: int) -> np.ndarray:
    p = Path(path)
    if p.suffix == ".txt":
        seq = load_sequence(p)
        tau = seq.spec.tau if seq.spec is not None else tau
        return seq.frames[:tau].mean(axis=0)
    img = load_raw(p)
    if np.iscomplexobj(img):
        raise UsageError(f"{path} holds a spectrum; a real prior image is needed")
    return img


# --------------------------------------------------------------------------
# subcommands


def cmd_phantom(args) -> int:
    if args.frames < 1:
        raise UsageError("--frames must be at least 1")
    try:
        spec = SequenceSpec(n=args.n, frames=args.frames, tau=args.tau, snr_db=args.snr_db,
                            curve_sigma=args.curve_sigma, seed=args.seed)
    except (ValueError, SizingError) as exc:
        raise UsageError(str(exc)) from None
    manifest = dump_sequence(build_sequence(spec), args.out)
    print(manifest)
    return EXIT_OK


def cmd_mask(args) -> int:
    xbar = _load_prior(args.prior, args.tau)
    total = xbar.size
    m = args.m if args.m is not None else _budget(args.fraction, total)
    if args.method == "random":
        mask = random_lowfreq_mask(xbar.shape, m, args.seed, args.decay)
    else:
        support = support_from_image(xbar, args.sparsity or m, args.levels, args.wavelet)
        if args.method == "algo1":
            mask = algo1_max_modulus(xbar, m)
        elif args.method == "algo2":
            mask = algo2_per_resolution(support, m)
        elif args.method == "algo3":
            mask = algo3_interference(xbar, support, m)
        else:
            mask = algo4_influence(support, m)
        if args.fill == "mean":
            mask = mask.with_fill(dft2(xbar))
    write_mask(args.out, mask)
    print(f"{args.out}: {mask.m} of {total} frequencies")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    mask = read_mask(args.mask)
    data = load_raw(args.input)
    f = data if np.iscomplexobj(data) else dft2(data)
    if f.shape != mask.shape:
        raise UsageError(f"input shape {f.shape} does not match mask shape {mask.shape}")
    if args.solver == "direct":
        img = reconstruct(f, mask)
    else:
        A = SensingOperator(mask.with_fill(None), args.levels, args.wavelet)
        n = args.sparsity or max(1, mask.m // 2)
        rcfg = RecoveryConfig(args.max_iters, args.rel_tol, n)
        f_j = f.ravel()[mask.indices]
        if args.solver == "iht":
            y = iht(A, f_j, rcfg)
        else:
            if args.prior is None:
                raise UsageError("lcamp needs --prior for its location mask")
            y = lcamp(A, f_j, support_from_image(_load_prior(args.prior, 5), n, args.levels, args.wavelet), rcfg)
        img = idwt2(y, args.levels, args.wavelet)
    dump_raw(args.out, img)
    print(args.out)
    return EXIT_OK


def run_benchmark(cfg: ExperimentConfig) -> Path:
    """Run every (method, fraction) cell and write CSVs, summary and showcase dumps."""
    out = Path(cfg.output_dir)
    seq = _sequence(cfg)
    total = int(np.prod(seq.frames.shape[1:]))
    show = _showcase(cfg, seq)
    bcfg = _bench_config(cfg)
    (out / "showcase").mkdir(parents=True, exist_ok=True)
    rows = []
    for method in cfg.methods:
        means = []
        for frac in cfg.fractions:
            report = run_sequence_benchmark(seq, method, _budget(frac, total), bcfg, keep_frames=[show])
            _write_text(out / f"{method}_{_frac_tag(frac)}.csv", report.to_csv())
            dump_raw(out / "showcase" / f"{method}_{_frac_tag(frac)}_frame{show:03d}.ksh",
                     report.reconstructions[show])
            means.append(report.mean)
        rows.append((method, means))
    dump_raw(out / "showcase" / f"truth_frame{show:03d}.ksh", seq.frames[show])
    csv_text, table = _summary_table(rows, cfg.fractions)
    _write_text(out / "summary.csv", csv_text)
    _write_text(out / "summary.txt", table)
    _write_text(out / "params.txt", cfg.to_text())
    return out


def run_sweep(cfg: ExperimentConfig) -> Path:
    """Adaptive-prior sweep over ``a_values`` for ``sweep_method`` at ``sweep_fraction``."""
    out = Path(cfg.output_dir)
    seq = _sequence(cfg)
    total = int(np.prod(seq.frames.shape[1:]))
    m = _budget(cfg.sweep_fraction, total)
    peak = seq.peak_frame
    summary = ["a,m_fraction,mean_error_pct,peak_window_error_pct"]
    traces = ["a,frame,error_pct"]
    for a in cfg.a_values:
        report = run_sequence_benchmark(seq, cfg.sweep_method, m, _bench_config(cfg, a))
        summary.append(f"{a!r},{report.m_fraction:.4g},{report.mean:.10g},{report.window_mean(peak):.10g}")
        traces += [f"{a!r},{int(t)},{e:.10g}" for t, e in zip(report.frames, report.errors)]
    _write_text(out / "sweep.csv", "\n".join(summary) + "\n")
    _write_text(out / "traces.csv", "\n".join(traces) + "\n")
    _write_text(out / "params.txt", cfg.to_text())
    return out


def cmd_benchmark(args) -> int:
    cfg = load_config(args.config, output_dir=args.out, workers=args.workers)
    print(run_benchmark(cfg) / "summary.txt")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, output_dir=args.out, workers=args.workers)
    print(run_sweep(cfg) / "sweep.csv")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.signal:
        x = load_raw(args.signal)
        if np.iscomplexobj(x):
            raise UsageError("oracle needs a real signal")
    else:
        rng = np.random.default_rng(args.seed)
        y = np.zeros(args.n)
        y[rng.choice(args.n, args.sparsity, replace=False)] = rng.standard_normal(args.sparsity)
        x = idwt2(y, args.levels, args.wavelet)
    support = support_from_image(x, args.sparsity, args.levels, args.wavelet)
    best, value = brute_force_optimal_mask(x, support, args.m)
    y = dwt2(x, args.levels, args.wavelet)
    print(f"optimum  J = {' '.join(map(str, best.indices))}  erec = {value:.12g}")
    heuristics = {
        "algo1": algo1_max_modulus(x, args.m),
        "algo2": algo2_per_resolution(support, args.m),
        "algo3": algo3_interference(x, support, args.m),
        "algo4": algo4_influence(support, args.m),
    }
    for name, mask in heuristics.items():
        print(f"{name:8} J = {' '.join(map(str, mask.indices))}  erec = {erec_direct(y, support, mask):.12g}")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kspace-select", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    ph = sub.add_parser("phantom", help="generate a synthetic dynamic sequence")
    ph.add_argument("--n", type=int, default=128, help="image side (power of two)")
    ph.add_argument("--frames", type=int, default=80)
    ph.add_argument("--tau", type=int, default=5, help="fully sampled bootstrap frames")
    ph.add_argument("--snr-db", type=float, default=float("inf"))
    ph.add_argument("--curve-sigma", type=float, default=0.1)
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--out", required=True, help="output directory")
    ph.set_defaults(func=cmd_phantom)

    mk = sub.add_parser("mask", help="design a measurement mask from a prior image")
    mk.add_argument("--prior", required=True, help="sequence manifest (mean of the bootstrap frames) or a raw image")
    mk.add_argument("--method", choices=DETERMINISTIC + ("random",), default="algo1")
    size = mk.add_mutually_exclusive_group(required=True)
    size.add_argument("--m", type=int)
    size.add_argument("--fraction", type=float)
    mk.add_argument("--sparsity", type=int, default=0, help="support size, 0 means m")
    mk.add_argument("--levels", type=int, default=4)
    mk.add_argument("--wavelet", default="haar")
    mk.add_argument("--fill", choices=("mean", "zero"), default="mean")
    mk.add_argument("--tau", type=int, default=5)
    mk.add_argument("--seed", type=int, default=0, help="random masks only")
    mk.add_argument("--decay", type=float, default=DEFAULT_DECAY, help="random masks only")
    mk.add_argument("--out", required=True, help="mask file")
    mk.set_defaults(func=cmd_mask)

    rc = sub.add_parser("reconstruct", help="reconstruct one frame from a mask")
    rc.add_argument("--mask", required=True)
    rc.add_argument("--input", required=True, help="raw image or spectrum")
    rc.add_argument("--solver", choices=("direct", "iht", "lcamp"), default="direct")
    rc.add_argument("--sparsity", type=int, default=0, help="iht/lcamp sparsity, 0 means m // 2")
    rc.add_argument("--prior", help="prior image or manifest for lcamp's location mask")
    rc.add_argument("--levels", type=int, default=4)
    rc.add_argument("--wavelet", default="haar")
    rc.add_argument("--max-iters", type=int, default=100)
    rc.add_argument("--rel-tol", type=float, default=1e-6)
    rc.add_argument("--out", required=True)
    rc.set_defaults(func=cmd_reconstruct)

    for name, func, text in [("benchmark", cmd_benchmark, "run the method x fraction error table"),
                             ("sweep-adaptive", cmd_sweep, "sweep the adaptive blending weight a")]:
        b = sub.add_parser(name, help=text)
        b.add_argument("--config", required=True, help="key = value experiment file")
        b.add_argument("--out", help="override output_dir")
        b.add_argument("--workers", type=int, help="override workers")
        b.set_defaults(func=func)

    orc = sub.add_parser("oracle", help="exhaustive optimal mask on a tiny instance")
    orc.add_argument("--signal", help="raw real image (at most 24 pixels); a random sparse 1-D signal if absent")
    orc.add_argument("--n", type=int, default=16, help="length of the random signal")
    orc.add_argument("--m", type=int, default=4)
    orc.add_argument("--sparsity", type=int, default=3)
    orc.add_argument("--levels", type=int, default=4)
    orc.add_argument("--wavelet", default="haar")
    orc.add_argument("--seed", type=int, default=0)
    orc.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DivergenceError, EmptySupportError, UndefinedReferenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ConfigError, SizingError, ComplexityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
