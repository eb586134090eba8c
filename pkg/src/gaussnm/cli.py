"""Command-line experiment runner.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 failed acceptance check (``mc-validate``).
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import channels, config, diagnostics, generator, montecarlo
from .config import CONVENTIONS, ConfigError
from .errors import DomainError, NumericError

log = logging.getLogger("gaussnm")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return format(float(x), ".17g")


def render_csv(header, rows, cfg):
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
    buf.write("# conventions: " + json.dumps(CONVENTIONS, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(payload, cfg):
    doc = {"config": cfg, "conventions": CONVENTIONS}
    doc.update(payload)
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def _table(header, rows, cfg, fmt):
    if fmt == "csv":
        return render_csv(header, rows, cfg)
    records = [dict(zip(header, r)) for r in rows]
    return render_json({"rows": records}, cfg)


def run_kossakowski_scan(cfg, fmt="csv"):
    k, h = config.build_kernel(cfg), config.build_hamiltonian(cfg)
    rows = []
    for t0 in sorted(cfg["t0_values"]):
        for t in config.time_grid(cfg):
            if t < t0:
                continue
            c = generator.kossakowski(k, h, t, t0, method=cfg["method"]).value
            lo, negative = generator.kossakowski_negativity(c)
            hi = float(np.linalg.eigvalsh(c)[-1])
            rows.append((t0, t, c[0, 0], c[0, 1], c[1, 1], lo, hi, negative))
    header = ["t0", "t", "C11", "C12", "C22", "eig_min", "eig_max", "negative_flag"]
    return _table(header, rows, cfg, fmt), rows


def fig1_data(cfg):
    h = config.build_hamiltonian(cfg)
    s1, s2 = config.build_states(cfg)
    times = config.time_grid(cfg)
    if times[0] != 0.0:
        raise ConfigError("times.start: fig1 trajectories start at 0")
    tol = cfg["tolerances"]["monotone"]
    rows, summary = [], {}
    for gamma in sorted(cfg["gammas"]):
        k = config.build_kernel(cfg, gamma=gamma)
        traj = diagnostics.fidelity_trajectory(k, h, s1, s2, times, cfg["method"])
        mono = diagnostics.detect_nonmonotonicity(traj, tol)
        for t, f, d in zip(traj.times, traj.values, traj.derivative):
            rows.append((gamma, t, f, d))
        summary[_fmt(gamma)] = {
            "F0": float(traj.values[0]),
            "F_min": float(traj.values.min()),
            "decreasing_intervals": mono.intervals,
            "max_drop": mono.max_drop,
            "verdict": "monotone" if mono.monotone else "non-monotone",
        }
    return rows, {"tolerance": tol, "series": summary}


def run_fig1(cfg, fmt="csv"):
    if cfg["kernel"].get("type") != "ou":
        raise ConfigError("kernel.type: fig1 scans gamma and needs an 'ou' kernel")
    rows, summary = fig1_data(cfg)
    header = ["gamma", "t", "F", "dF_dt"]
    if fmt == "csv":
        return render_csv(header, rows, cfg), render_json({"summary": summary}, cfg)
    records = [dict(zip(header, r)) for r in rows]
    return render_json({"rows": records, "summary": summary}, cfg), None


def divisibility_report(cfg):
    k, h = config.build_kernel(cfg), config.build_hamiltonian(cfg)
    method = cfg["method"]
    tol = cfg["tolerances"]["semigroup"]

    deviations = []
    for t0, t1, t2 in cfg["triples"]:
        m = channels.semigroup_defect_matrix(k, h, t0, t1, t2, method)
        deviations.append({"t0": t0, "t1": t1, "t2": t2,
                           "max": float(np.max(np.abs(m))),
                           "frobenius": float(np.linalg.norm(m))})
    max_dev = max((d["max"] for d in deviations), default=0.0)
    depends = max_dev > tol

    cp_rows, comp_rows = [], []
    for t0, t in cfg["pairs"]:
        lam = channels.lambda_channel(k, h, t, t0, method)
        ok, lo = channels.is_cp(lam)
        cp_rows.append({"t0": t0, "t": t, "cp": ok, "min_eig": lo})
        composed = channels.compose(lam, channels.gamma_channel(k, h, t0, 0.0, method))
        direct = channels.gamma_channel(k, h, t, 0.0, method)
        comp_rows.append({"t0": t0, "t": t, "defect": channels.channel_defect(composed, direct)})

    v = cfg["violation"]
    cert = diagnostics.find_positivity_violation(k, h, v["t0"], v["dt"], method)
    divisible = all(r["cp"] for r in cp_rows) and cert is None
    return {
        "criterion_semigroup": {
            "deviations": deviations,
            "max_deviation": max_dev,
            "tolerance": tol,
            "generator_depends_on_t0": depends,
            "verdict": "non-Markovian" if depends else "Markovian",
        },
        "criterion_divisibility": {
            "lambda_cp": cp_rows,
            "composition_defects": comp_rows,
            "certificate": cert.to_dict() if cert is not None else None,
            "divisible": divisible,
            "verdict": "Markovian" if divisible else "non-Markovian",
        },
    }


def mc_report(cfg):
    k, h = config.build_kernel(cfg), config.build_hamiltonian(cfg)
    mc = cfg["montecarlo"]
    est = montecarlo.empirical_g(k, h, mc["t0"], mc["t"], mc["dt"], mc["n_paths"], cfg["seed"])
    g = channels.gram_g(k, h, mc["t"], mc["t0"], cfg["method"]).value
    diff = est.cov_v - g
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(est.stderr > 0, diff / est.stderr, np.where(diff == 0, 0.0, np.inf))
    zmax = float(np.max(np.abs(z)))
    return {
        "n_paths": est.n_paths,
        "mean_v": est.mean_v,
        "cov_v": est.cov_v,
        "gram_g": g,
        "stderr": est.stderr,
        "z": z,
        "max_abs_z": zmax,
        "pass": bool(zmax <= cfg["tolerances"]["z_max"]),
    }


def semigroup_rows(cfg):
    k, h = config.build_kernel(cfg), config.build_hamiltonian(cfg)
    rows = []
    for t0, t1, t2 in cfg["triples"]:
        m = channels.semigroup_defect_matrix(k, h, t0, t1, t2, cfg["method"])
        rows.append((t0, t1, t2, float(np.max(np.abs(m))), float(np.linalg.norm(m))))
    return rows


def violation_report(cfg):
    k, h = config.build_kernel(cfg), config.build_hamiltonian(cfg)
    v = cfg["violation"]
    cert = diagnostics.find_positivity_violation(k, h, v["t0"], v["dt"], cfg["method"])
    if cert is None:
        return {"found": False, "certificate": None}
    rate, rates = diagnostics.first_order_rate_estimate(cert, k, h)
    return {
        "found": True,
        "certificate": cert.to_dict(),
        "reverified_det": diagnostics.verify_certificate(cert, k, h, cfg["method"]),
        "richardson_rate": rate,
        "rates": rates,
    }


def _json_only(fmt, name):
    if fmt != "json":
        raise ConfigError(f"--format: {name} produces a JSON report only")


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def build_parser():
    p = argparse.ArgumentParser(prog="gaussnm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fmt in (("kossakowski-scan", "csv"), ("fig1", "csv"), ("divisibility", "json"),
                      ("mc-validate", "json"), ("semigroup-check", "csv"),
                      ("violation-search", "json")):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        sp.add_argument("--out", help="output file (stdout when omitted)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config.load_config(args.config, args.seed)
        cmd, fmt = args.command, args.format
        status = EXIT_OK
        if cmd == "kossakowski-scan":
            text, _ = run_kossakowski_scan(cfg, fmt)
        elif cmd == "fig1":
            text, summary = run_fig1(cfg, fmt)
            if summary is not None:
                if args.out is None:
                    sys.stderr.write(summary)
                else:
                    Path(args.out).with_suffix(".summary.json").write_text(summary)
        elif cmd == "divisibility":
            _json_only(fmt, cmd)
            text = render_json(divisibility_report(cfg), cfg)
        elif cmd == "mc-validate":
            _json_only(fmt, cmd)
            report = mc_report(cfg)
            text = render_json(report, cfg)
            status = EXIT_OK if report["pass"] else EXIT_CHECK
        elif cmd == "semigroup-check":
            header = ["t0", "t1", "t2", "deviation_max", "deviation_frobenius"]
            text = _table(header, semigroup_rows(cfg), cfg, fmt)
        else:
            _json_only(fmt, cmd)
            text = render_json(violation_report(cfg), cfg)
        _emit(text, args.out)
        return status
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(f"gaussnm: error: {exc}\n")
        return EXIT_CONFIG
    except NumericError as exc:
        sys.stderr.write(f"gaussnm: numerical failure: {exc} (residual {exc.residual})\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
