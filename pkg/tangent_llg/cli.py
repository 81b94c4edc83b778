import argparse
import json
import sys

from tangent_llg import config as config_mod
from tangent_llg import constants
from tangent_llg import fs
from tangent_llg import mesh as mesh_mod
from tangent_llg import simulation
from tangent_llg.errors import InvalidArgument
from tangent_llg.errors import TangentLLGError


def _print_json(payload):
    print(json.dumps(payload, indent=2, sort_keys=True))


def _emit_ok(args, payload=None):
    if args.json:
        _print_json(dict(payload or {}, ok=True))
    else:
        print("ok")


def _parse_list(text, cast, size=None, name="value"):
    try:
        values = [cast(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidArgument(f"cannot parse {name} {text!r}")
    if size is not None and len(values) != size:
        raise InvalidArgument(f"{name} needs {size} comma-separated numbers", f"got {text!r}")
    return values


def cmd_run(args):
    cfg = config_mod.parse_config(args.config)
    out_dir = cfg.output_dir(args.out)
    mesh = config_mod.build_mesh(cfg)
    sim = simulation.Simulation(cfg, mesh, out_dir=out_dir, quiet=args.json)
    state, _series = sim.run(install_signal_handlers=True)
    summary = sim.summary()
    if args.json:
        _print_json(dict(summary, out_dir=out_dir))
        return constants.EXIT_OK
    final = summary["final"]
    print(f"{summary['scheme']}: {state.step} steps to t={state.t:.6g}")
    print(f"E_total={final['E_total']:.10g} <m>=({final['mx']:.6f}, {final['my']:.6f}, {final['mz']:.6f})")
    print(f"constraint_l1={final['constraint_l1']:.3e}")
    if summary["solver_fallbacks"]:
        print(f"direct-solve fallbacks: {summary['solver_fallbacks']}")
    if summary["stability_failures"]:
        print(f"stability monitor failures: {summary['stability_failures']}")
    print(f"output: {out_dir}")
    return constants.EXIT_OK


def cmd_mesh_gen(args):
    size = _parse_list(args.size, float, 3, "--size")
    counts = (args.nx, args.ny, args.nz)
    generator = mesh_mod.generate_type1 if args.type == 1 else mesh_mod.generate_type2
    mesh = generator(counts, size)
    mesh_mod.save_mesh(mesh, args.out)
    payload = {"path": args.out, "n_vertices": mesh.n_vertices, "n_cells": mesh.n_cells}
    if args.json:
        _emit_ok(args, payload)
    else:
        print(f"wrote {args.out}: {mesh.n_vertices} vertices, {mesh.n_cells} cells")
    return constants.EXIT_OK


def cmd_mesh_check(args):
    mesh = mesh_mod.load_mesh(args.file)
    report = mesh_mod.analyze_mesh(mesh)
    if args.json:
        _print_json(report._asdict())
        return constants.EXIT_OK
    print(f"vertices: {report.n_vertices}")
    print(f"cells: {report.n_cells}")
    print(f"volume: {report.volume:.10g}")
    print(f"h_max: {report.h_max:.10g}")
    print(f"h_min: {report.h_min:.10g}")
    verdict = "holds" if report.angle_condition_holds else f"violated ({report.offending_pairs} pairs)"
    print(f"angle condition: {verdict}")
    print(f"worst off-diagonal stiffness: {report.worst_offdiag:.3e} (threshold {report.angle_threshold:.3e})")
    return constants.EXIT_OK


def cmd_sweep(args):
    cfg = config_mod.parse_config(args.config)
    cast = float if args.vary == "k" else int
    values = _parse_list(args.values, cast, name="--values")
    out_root = cfg.output_dir(args.out)
    payload = simulation.sweep(cfg, args.vary, values, out_root)
    if args.json:
        _print_json(payload)
        return constants.EXIT_OK
    for point in payload["points"]:
        print(
            f"{point['label']}: k={point['k']:.6g} h={point['h_max']:.6g} "
            f"E_total={point['E_total']:.10g} constraint_l1={point['constraint_l1']:.3e}"
        )
    if payload["slope"] is not None:
        print(f"log-log slope of constraint_l1: {payload['slope']:.3f}")
    print(f"output: {fs.run_file(out_root, constants.SWEEP_FILENAME)}")
    return constants.EXIT_OK


def cmd_preset(args):
    cfg = config_mod.preset(args.name)
    text = f"# preset {args.name}\n" + config_mod.PRESETS[args.name].lstrip("\n")
    if args.out:
        fs.atomic_write_text(args.out, text)
        if args.json:
            _emit_ok(args, {"path": args.out})
        else:
            print(f"wrote {args.out}")
        return constants.EXIT_OK
    if args.json:
        _print_json({"name": args.name, "values": cfg.values, "derived": cfg.derived()})
    else:
        print(text, end="")
    return constants.EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="tangent-llg")
    parser.add_argument("--json", action="store_true")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    run_parser = subparsers.add_parser("run", help="Integrate one configuration")
    run_parser.add_argument("--config", required=True)
    run_parser.add_argument("--out", help="Output directory (default: output_dir or out/<config name>)")
    run_parser.set_defaults(func=cmd_run)

    mesh_parser = subparsers.add_parser("mesh", help="Generate or check tetrahedral meshes")
    mesh_sub = mesh_parser.add_subparsers(dest="mesh_command")
    mesh_sub.required = True

    gen_parser = mesh_sub.add_parser("gen")
    gen_parser.add_argument("--type", type=int, choices=(1, 2), required=True)
    gen_parser.add_argument("--nx", type=int, required=True)
    gen_parser.add_argument("--ny", type=int, required=True)
    gen_parser.add_argument("--nz", type=int, required=True)
    gen_parser.add_argument("--size", required=True, metavar="X,Y,Z")
    gen_parser.add_argument("--out", required=True)
    gen_parser.set_defaults(func=cmd_mesh_gen)

    check_parser = mesh_sub.add_parser("check")
    check_parser.add_argument("file")
    check_parser.set_defaults(func=cmd_mesh_check)

    sweep_parser = subparsers.add_parser("sweep", help="Run one configuration over several k or h")
    sweep_parser.add_argument("--config", required=True)
    sweep_parser.add_argument("--vary", choices=("k", "h"), required=True)
    sweep_parser.add_argument("--values", required=True, help="Comma-separated step sizes or refinement factors")
    sweep_parser.add_argument("--out")
    sweep_parser.set_defaults(func=cmd_sweep)

    preset_parser = subparsers.add_parser("preset", help="Print or write a bundled configuration")
    preset_parser.add_argument("name", choices=sorted(config_mod.PRESETS))
    preset_parser.add_argument("--out")
    preset_parser.set_defaults(func=cmd_preset)
    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TangentLLGError as exc:
        if args.json:
            _print_json({"ok": False, "error": str(exc), "exit_code": exc.exit_code})
        else:
            print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        if args.json:
            _print_json({"ok": False, "error": str(exc), "exit_code": constants.EXIT_IO})
        else:
            print(f"error: {exc}", file=sys.stderr)
        return constants.EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
