"""Run driver: time loop, sampling, event log and on-disk outputs."""

import concurrent.futures
import datetime
import math
import os
import signal
import sys
import threading

from tangent_llg import assembly
from tangent_llg import config as config_mod
from tangent_llg import constants
from tangent_llg import diagnostics
from tangent_llg import fs
from tangent_llg import integrators
from tangent_llg import mesh as mesh_mod
from tangent_llg import output
from tangent_llg import physics
from tangent_llg.errors import ConfigError
from tangent_llg.errors import TangentLLGError


def _log_event(out_dir, event_type, message, details=None):
    """Append an event to the run's event log."""
    if not out_dir:
        return
    ts = datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    line = f"[{ts}] {event_type}: {message}"
    if details:
        line += f" | {details}"
    fs.append_line(fs.run_file(out_dir, constants.EVENTS_FILENAME), line + "\n")


def step_sizes(T, k):
    """Uniform steps of size k, the last one truncated to land on T."""
    if T <= 0.0:
        return []
    n = max(1, math.ceil(T / k - 1e-9))
    sizes = [k] * n
    sizes[-1] = T - (n - 1) * k
    if sizes[-1] <= 0.0:
        sizes.pop()
    return sizes


class Simulation:
    def __init__(self, cfg, mesh, out_dir=None, quiet=False):
        self.cfg = cfg
        self.mesh = mesh
        self.out_dir = out_dir
        self.quiet = quiet
        self.series = diagnostics.TimeSeries()
        self.state = None
        self.issues = []
        self.fallbacks = 0
        self.stability_failures = 0
        self._running = False

    def _say(self, text):
        if not self.quiet:
            print(text, file=sys.stderr)

    def stop(self):
        self._running = False

    def _install_signal_handlers(self):
        """Returns the previous handlers, or None off the main thread."""
        if threading.current_thread() is not threading.main_thread():
            return None

        def _handle_signal(signum, frame):
            self._running = False

        previous = {sig: signal.getsignal(sig) for sig in (signal.SIGTERM, signal.SIGINT)}
        for sig in previous:
            signal.signal(sig, _handle_signal)
        return previous

    def prepare(self):
        cfg = self.cfg
        self.issues = integrators.validate_config(cfg, self.mesh)
        for issue in self.issues:
            if issue["level"] != "info":
                self._say(f"{issue['level']}: {issue['message']}")
            _log_event(self.out_dir, issue["level"].upper(), issue["message"])
        integrators.raise_for_errors(self.issues)
        if cfg.si_mode:
            derived = cfg.derived()
            details = ", ".join(f"{key}={value:.6g}" for key, value in sorted(derived.items()))
            self._say(f"derived: {details}")
            _log_event(self.out_dir, "CONFIG", "derived nondimensional parameters", details)
        self.params = cfg.material
        self.scheme = cfg.scheme
        self.forms = assembly.assemble_static(self.mesh, self.params.dmi_form, self.params.chirality)
        self.angle_ok = mesh_mod.analyze_mesh(self.mesh).angle_condition_holds
        m0 = config_mod.initial_field(cfg, self.mesh)
        self.state = integrators.initial_state(m0, self.scheme)
        self.M = self.rho = None
        if self.scheme.kind == integrators.TPS2:
            self.M = physics.M_of_k(cfg.k)
            self.rho = physics.rho_of_k(cfg.k) if self.scheme.stabilization_on else 0.0

    def run(self, install_signal_handlers=False):
        if self.state is None:
            self.prepare()
        previous_handlers = self._install_signal_handlers() if install_signal_handlers else None
        cfg = self.cfg
        every = cfg.get("output_every")
        vtk_every = cfg.get("vtk_every")
        tol = cfg.get("solver_tol")
        sizes = step_sizes(cfg.T, cfg.k)
        _log_event(
            self.out_dir,
            "START",
            f"{self.scheme.kind} for {len(sizes)} steps",
            f"k={cfg.k:.6g}, T={cfg.T:.6g}, vertices={self.mesh.n_vertices}, cells={self.mesh.n_cells}",
        )
        self.series.add_sample(diagnostics.sample_record(self.state, self.forms, self.params))
        stable_window = True
        v = None
        self._running = True
        try:
            for index, k in enumerate(sizes):
                if not self._running:
                    _log_event(self.out_dir, "STOP", f"interrupted at step {self.state.step}")
                    if self.state.t > self.series.samples[-1]["t"]:
                        self.series.add_sample(
                            diagnostics.sample_record(self.state, self.forms, self.params, v, stable_window)
                        )
                    break
                before = self.state
                v, after = integrators.advance(before, self.scheme, self.forms, self.params, k, self.M, self.rho, tol)
                last = index == len(sizes) - 1
                after.t = cfg.T if last else (index + 1) * cfg.k
                report = after.info["report"]
                if report.method != "gmres":
                    self.fallbacks += 1
                    _log_event(self.out_dir, "FALLBACK", f"direct solve at step {after.step}",
                               f"residual={report.relative_residual:.3e}")
                record = diagnostics.step_record(before, after, v, self.forms, self.params)
                record["stability_ok"] = diagnostics.stability_holds(record)
                if not record["stability_ok"]:
                    self.stability_failures += 1
                    _log_event(self.out_dir, "STABILITY", f"gradient norm grew under projection at step {after.step}",
                               f"{record['grad_after']:.17g} > {record['grad_linear']:.17g}")
                stable_window = stable_window and record["stability_ok"]
                self.series.add_step(record)
                self.state = after
                if (index + 1) % every == 0 or last:
                    self.series.add_sample(
                        diagnostics.sample_record(after, self.forms, self.params, v, stable_window)
                    )
                    stable_window = True
                if self.out_dir and vtk_every and (index + 1) % vtk_every == 0:
                    output.write_vtk(self.mesh, after.m, os.path.join(self.out_dir, f"m_{after.step:06d}.vtk"))
        except TangentLLGError as exc:
            _log_event(self.out_dir, "FAIL", exc.reason, exc.detail)
            self._write_outputs(failure=str(exc))
            raise
        finally:
            for sig, handler in (previous_handlers or {}).items():
                signal.signal(sig, handler)
        self._write_outputs()
        _log_event(self.out_dir, "DONE", f"finished at t={self.state.t:.6g}", f"steps={self.state.step}")
        return self.state, self.series

    def summary(self, failure=None):
        last = self.series.samples[-1] if self.series.samples else {}
        return {
            "scheme": self.scheme.kind,
            "theta": self.scheme.theta,
            "steps": self.state.step,
            "t": self.state.t,
            "k": self.cfg.k,
            "T": self.cfg.T,
            "final": {key: last[key] for key in last},
            "warnings": [issue["message"] for issue in self.issues if issue["level"] == "warning"],
            "solver_fallbacks": self.fallbacks,
            "stability_failures": self.stability_failures,
            "angle_condition_holds": self.angle_ok,
            "failure": failure,
        }

    def _write_outputs(self, failure=None):
        if not self.out_dir:
            return
        if len(self.series):
            output.write_timeseries_csv(self.series, fs.run_file(self.out_dir, constants.SERIES_FILENAME))
        output.write_vtk(self.mesh, self.state.m, fs.run_file(self.out_dir, constants.FINAL_VTK_FILENAME))
        fs.atomic_write_text(fs.run_file(self.out_dir, constants.CONFIG_FILENAME), config_mod.emit_config(self.cfg))
        fs.atomic_write_json(fs.run_file(self.out_dir, constants.SUMMARY_FILENAME), self.summary(failure))


def run(cfg, mesh, out_dir=None, quiet=True):
    """Integrate cfg on mesh; returns (final state, time series)."""
    return Simulation(cfg, mesh, out_dir=out_dir, quiet=quiet).run()


def _sweep_point(cfg, vary, value, out_root, mesh):
    if vary == "k":
        point_cfg = cfg.with_overrides(k=float(value), time_step_s=None)
        label = f"k_{float(value):.6g}"
        point_mesh = mesh
    else:
        factor = int(value)
        cells = tuple(int(c) * factor for c in cfg.get("mesh_cells"))
        point_cfg = cfg.with_overrides(mesh_cells=cells)
        label = f"h_{factor}"
        point_mesh = config_mod.build_mesh(point_cfg)
    out_dir = os.path.join(out_root, label)
    state, series = Simulation(point_cfg, point_mesh, out_dir=out_dir, quiet=True).run()
    last = series.samples[-1]
    return {
        "label": label,
        "value": value,
        "k": point_cfg.k,
        "h_max": mesh_mod.analyze_mesh(point_mesh).h_max,
        "steps": state.step,
        "E_total": last["E_total"],
        "constraint_l1": last["constraint_l1"],
        "mz": last["mz"],
        "series": fs.run_file(out_dir, constants.SERIES_FILENAME),
    }


def sweep(cfg, vary, values, out_root, workers=None):
    """Independent runs over k or over mesh refinement factors, in parallel."""
    if vary not in ("k", "h"):
        raise ConfigError(f"cannot vary {vary}", detail="expected k or h")
    if vary == "h" and cfg.get("mesh") == "file":
        raise ConfigError("cannot refine a mesh read from file")
    if not values:
        raise ConfigError("sweep needs at least one value")
    mesh = config_mod.build_mesh(cfg) if vary == "k" else None
    if workers is None:
        workers = constants.worker_count()
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_point, cfg, vary, value, out_root, mesh) for value in values]
        points = [future.result() for future in futures]
    payload = {"vary": vary, "points": points, "slope": None}
    xs = [p["k"] if vary == "k" else p["h_max"] for p in points]
    ys = [p["constraint_l1"] for p in points]
    if len(points) > 1 and all(y > 0 for y in ys):
        payload["slope"] = diagnostics.loglog_slope(xs, ys)
    fs.atomic_write_json(os.path.join(out_root, constants.SWEEP_FILENAME), payload)
    return payload
