"""Command-line driver for the mask-optimization pipeline.

Subcommands: gen-kernels, tsdf, simulate, optimize, metrics, fracture.
Configuration precedence: command-line flags override config-file keys
("key = value" lines) override built-in defaults.  Exit codes: 0 success,
1 validation/usage errors, 2 numerical failures.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import fileio, litho, metrics as metrics_mod, optimizer
from .errors import DegenerateInputError, FormatError, NumericalError
from .levelset import LevelSetField, mask_from_phi, tsdf_from_mask
from .optimizer import OptConfig

_CONFIG_KEYS = {
    "alpha": float, "beta": float, "lambda": float, "curvature_weight": float,
    "sigma_z": float, "i_th": float, "epsilon": float, "eta": float,
    "d_upper": float, "d_lower": float, "max_iters": int,
    "stop_rel_tol": float, "stop_patience": int, "use_curvature": bool,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        val = val.strip()
        if key not in _CONFIG_KEYS:
            raise FormatError(f"{path}:{lineno}: unknown key {key!r}")
        conv = _CONFIG_KEYS[key]
        if conv is bool:
            values[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            values[key] = conv(val)
    return values


def _build_config(args):
    values = {}
    if getattr(args, "config", None):
        values.update(_parse_config_file(args.config))
    for flag, key in [
        ("alpha", "alpha"), ("beta", "beta"), ("curvature", "lambda"),
        ("sigma_z", "sigma_z"), ("i_th", "i_th"), ("epsilon", "epsilon"),
        ("eta", "eta"), ("d_upper", "d_upper"), ("d_lower", "d_lower"),
        ("max_iters", "max_iters"), ("stop_rel_tol", "stop_rel_tol"),
        ("stop_patience", "stop_patience"),
    ]:
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    if getattr(args, "no_curvature", False):
        values["use_curvature"] = False
    if "lambda" in values:
        values["curvature_weight"] = values.pop("lambda")
    return OptConfig(**values)


def _add_opt_flags(p):
    p.add_argument("--config", help="config file with 'key = value' lines")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--curvature", type=float, metavar="LAMBDA",
                   help="curvature weight")
    p.add_argument("--no-curvature", action="store_true",
                   help="disable the curvature term")
    p.add_argument("--sigma-z", dest="sigma_z", type=float)
    p.add_argument("--i-th", dest="i_th", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--d-upper", dest="d_upper", type=float)
    p.add_argument("--d-lower", dest="d_lower", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--stop-rel-tol", dest="stop_rel_tol", type=float)
    p.add_argument("--stop-patience", dest="stop_patience", type=int)


def _load_target(path, size):
    return fileio.load_target(path, tile_side=size)


def _cmd_gen_kernels(args):
    focus, defocus = litho.gen_synthetic_kernels(args.side, args.count, args.seed)
    litho.save_kernels(args.out, focus, defocus)
    print(f"wrote {args.out}: {args.count} kernels of side {args.side} per condition")
    return 0


def _cmd_tsdf(args):
    cfg = _build_config(args)
    target = _load_target(args.target, args.size)
    lsf = tsdf_from_mask(target, cfg.d_upper, cfg.d_lower)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fileio.dump_field(out / "phi.f64", lsf.phi)
    if args.png:
        fileio.render_png(out / "phi.png", mask_from_phi(lsf), target)
    print(f"wrote {out / 'phi.f64'}")
    return 0


def _cmd_simulate(args):
    cfg = _build_config(args)
    mask = _load_mask_or_target(args, cfg)
    focus, defocus = litho.load_kernels(args.kernels)
    prints = litho.print_corners(mask.astype(np.float64), focus, defocus, cfg,
                                 binarize=True)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, grid in [("nominal", prints.nominal), ("inner", prints.inner),
                       ("outer", prints.outer)]:
        fileio.save_pgm(out / f"{name}.pgm", grid)
    print(f"wrote {out}/nominal.pgm, inner.pgm, outer.pgm")
    return 0


def _load_mask_or_target(args, cfg):
    if getattr(args, "mask", None):
        return fileio.load_pgm(args.mask)
    return _load_target(args.target, args.size)


def _cmd_optimize(args):
    cfg = _build_config(args)
    target = _load_target(args.target, args.size)
    focus, defocus = litho.load_kernels(args.kernels)
    phi0 = None
    if args.phi0:
        phi0 = LevelSetField(fileio.load_field(args.phi0), cfg.d_upper, cfg.d_lower)
    modulation = fileio.load_field(args.modulation) if args.modulation else None
    result = optimizer.optimize(target, focus, defocus, cfg,
                                phi0=phi0, modulation=modulation)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fileio.save_pgm(out / "mask.pgm", result.final_mask)
    fileio.dump_field(out / "phi.f64", result.final_phi.phi)
    (out / "metrics.json").write_text(json.dumps(result.metrics.as_dict()) + "\n")
    fileio.write_loss_csv(out / "loss.csv", result.loss_history)
    if args.png:
        fileio.render_png(out / "mask.png", result.final_mask, target)
    print(json.dumps(result.metrics.as_dict()))
    return 0


def _cmd_metrics(args):
    cfg = _build_config(args)
    t0 = time.perf_counter()
    mask = fileio.load_pgm(args.mask)
    target = _load_target(args.target, args.size)
    if mask.shape != target.shape:
        raise ValueError(f"mask {mask.shape} and target {target.shape} differ")
    focus, defocus = litho.load_kernels(args.kernels)
    prints = litho.print_corners(mask.astype(np.float64), focus, defocus, cfg,
                                 binarize=True)
    report = metrics_mod.MetricsReport(
        l2=metrics_mod.l2_error(prints.nominal, target),
        pvband=metrics_mod.pvband(prints.inner, prints.outer),
        shots=metrics_mod.shot_count(mask),
        wall_time=time.perf_counter() - t0,
    )
    text = json.dumps(report.as_dict())
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def _cmd_fracture(args):
    mask = fileio.load_pgm(args.mask)
    rects = metrics_mod.fracture(mask)
    lines = ["x,y,w,h"] + [f"{x},{y},{w},{h}" for x, y, w, h in rects]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}: {len(rects)} shots")
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = _Parser(prog="lsopc",
                     description="Level-set inverse-lithography mask optimizer")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("gen-kernels", help="generate synthetic optical kernels")
    p.add_argument("--side", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_kernels)

    p = sub.add_parser("tsdf", help="truncated signed distance field of a layout")
    p.add_argument("--target", required=True)
    p.add_argument("--size", type=int, default=2048)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--png", action="store_true")
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_tsdf)

    p = sub.add_parser("simulate", help="print a mask at the three process corners")
    p.add_argument("--mask", help="mask PGM (defaults to the rasterized target)")
    p.add_argument("--target")
    p.add_argument("--kernels", required=True)
    p.add_argument("--size", type=int, default=2048)
    p.add_argument("--out-dir", required=True)
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("optimize", help="run the full level-set ILT loop")
    p.add_argument("--target", required=True)
    p.add_argument("--kernels", required=True)
    p.add_argument("--size", type=int, default=2048)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--phi0", help="initial level-set field (DVLF1)")
    p.add_argument("--modulation", help="curvature modulation gate (DVLF1)")
    p.add_argument("--png", action="store_true")
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("metrics", help="evaluate a mask against a target")
    p.add_argument("--mask", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--kernels", required=True)
    p.add_argument("--size", type=int, default=2048)
    p.add_argument("--out")
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("fracture", help="greedy rectangle decomposition of a mask")
    p.add_argument("--mask", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fracture)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code or 0
    if args.command == "simulate" and not (args.mask or args.target):
        print("simulate: one of --mask or --target is required", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 2
    except (FormatError, DegenerateInputError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
