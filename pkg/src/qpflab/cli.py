"""Command-line front end.

Every subcommand reads an optional INI config (``[run]`` plus a section
named after the subcommand), lets flags override its keys, validates the
merged values and writes ``<out>.csv`` / ``<out>.json`` (and ``<out>.svg``
on request).  Exit status: 0 success, 1 a check reported a failure, 2 bad
usage or configuration.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circle import RotationSpec
from .errors import ConfigError, QpfError, TooManyPoints
from .systems import FAMILIES, make_family

MAX_SVG_POINTS = 10**6
GRAPH_KINDS = ("upper", "lower", "middle", "pullback")

FAMILY_PARAMS = {
    "arctan": ("alpha", "beta"),
    "rescaled_arctan": ("alpha", "beta"),
    "symmetric": ("alpha", "beta"),
    "pinched": ("alpha",),
    "arnold": ("tau", "alpha", "beta", "forcing", "sigma", "center"),
    "tanh_sin": ("alpha", "amplitude"),
    "harper": ("E", "lam"),
    "riccati": ("E", "lam"),
    "harper_interval": ("E", "lam", "sigma"),
}
# the parameter swept by bifurcate/scaling
SWEPT = {"harper": "lam", "riccati": "lam", "harper_interval": "lam", "tanh_sin": "amplitude"}


# ---------------------------------------------------------------- config handling


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


# key -> (type, check, default, help)
KEYS = {
    "family": (str, lambda v: v in FAMILIES, "arctan", "system family"),
    "alpha": (float, _pos, None, "family parameter alpha"),
    "beta": (float, None, None, "forcing strength"),
    "gamma": (float, _pos, None, "contraction threshold gamma"),
    "E": (float, None, None, "energy"),
    "lam": (float, None, None, "coupling"),
    "tau": (float, None, None, "Arnold rotation parameter"),
    "amplitude": (float, None, None, "forcing amplitude"),
    "forcing": (str, lambda v: v in ("sin", "peak"), None, "Arnold forcing shape"),
    "sigma": (float, _pos, None, "peak slope"),
    "center": (float, None, None, "peak center"),
    "rotation": (str, lambda v: v in ("golden", "silver"), "golden", "rotation number"),
    "grid": (int, lambda v: v >= 2, 2048, "grid size G"),
    "orbit_points": (int, _nonneg, 0, "orbit points omega_1.. added to the grid"),
    "iterates": (int, _nonneg, 3000, "iterate budget"),
    "seed": (int, _nonneg, 0, "random seed"),
    "workers": (int, _pos, 1, "worker threads"),
    "mode": (str, lambda v: v in ("strict", "empirical"), "empirical", "strict or empirical"),
    "out": (str, None, "qpflab_out", "output prefix"),
    "svg": (bool, None, False, "also write an SVG plot"),
    # command specific
    "which": (str, lambda v: v == "all" or set(v.split(",")) <= set(GRAPH_KINDS), "upper",
              "comma separated graph kinds, or 'all'"),
    "theta": (float, None, 0.0, "start angle"),
    "x": (float, None, 0.0, "start value"),
    "horizons": (str, None, "1,10,100,1000", "comma separated horizons"),
    "lo": (float, None, 0.0, "lower bracket end"),
    "hi": (float, None, 1.5, "upper bracket end"),
    "tol": (float, _pos, 1e-5, "bracket tolerance"),
    "p_max": (int, _nonneg, 3, "largest p"),
    "window": (int, _pos, 10**4, "time window [-W, W]"),
    "u": (int, _pos, 8, "u"),
    "v": (int, _pos, 58, "v"),
    "samples": (int, _pos, 20, "number of samples"),
    "l_max": (int, _nonneg, 30, "largest l"),
    "n_max": (int, _pos, 30, "largest n"),
    "min_depth": (float, _pos, 0.1, "peak prominence threshold"),
    "energies": (str, None, "0,2,4.3,4.4", "comma separated energies"),
    "lambda_c": (str, None, "", "energies for the critical coupling curve"),
    "offsets": (str, None, "1e-2,3.1622776601683794e-3,1e-3,3.1622776601683794e-4", "beta_c - beta values"),
}

COMMON = ("family", "alpha", "beta", "gamma", "E", "lam", "tau", "amplitude", "forcing", "sigma", "center",
          "rotation", "grid", "orbit_points", "iterates", "seed", "workers", "mode", "out", "svg")
COMMANDS = {
    "graph": ("which",),
    "lyapunov": ("theta", "x", "horizons"),
    "bifurcate": ("lo", "hi", "tol"),
    "sink-source": ("p_max", "window", "u", "v"),
    "induction": ("samples", "l_max", "n_max"),
    "timesets": ("window", "u", "v"),
    "peaks": ("min_depth",),
    "harper": (),
    "cocycle": ("energies", "samples", "lambda_c", "tol"),
    "scaling": ("lo", "hi", "tol", "offsets"),
}


def _coerce(section: str, key: str, raw):
    typ, check, _, _ = KEYS[key]
    try:
        if typ is bool:
            val = raw if isinstance(raw, bool) else str(raw).strip().lower() in ("1", "yes", "true", "on")
        elif typ is int:
            val = int(float(raw)) if isinstance(raw, str) and "e" in raw.lower() else int(raw)
        else:
            val = typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}: cannot read {raw!r} as {typ.__name__}") from None
    if check is not None and not check(val):
        raise ConfigError(f"{section}.{key}: invalid value {raw!r}")
    return val


def load_config(command: str, path: str | None, overrides: dict) -> dict:
    """Merge defaults, config file sections and flag overrides, then validate."""
    keys = COMMON + COMMANDS[command]
    cfg = {k: KEYS[k][2] for k in keys}
    where = {k: "default" for k in keys}
    if path:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(path):
            raise ConfigError(f"config file {path!r} not found")
        for sec in ("run", command):
            if cp.has_section(sec):
                for k, v in cp.items(sec):
                    if k not in keys:
                        raise ConfigError(f"{sec}.{k}: unknown key for '{command}'")
                    cfg[k] = _coerce(sec, k, v)
                    where[k] = sec
    for k, v in overrides.items():
        if v is not None and k in keys:
            cfg[k] = _coerce("flag", k, v)
            where[k] = "flag"
    if command == "harper" and where["family"] == "default":
        cfg["family"] = "harper"
    fam = cfg["family"]
    if command == "harper" and fam not in ("harper", "riccati", "harper_interval"):
        raise ConfigError(f"{where['family']}.family: '{fam}' is not a projective family")
    for k in ("alpha", "beta", "gamma", "E", "lam", "tau", "amplitude", "forcing", "sigma", "center"):
        if cfg.get(k) is not None and k not in FAMILY_PARAMS[fam] and k != "gamma":
            raise ConfigError(f"{where[k]}.{k}: not a parameter of family '{fam}'")
    return cfg


def _floats(section: str, key: str, text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected comma separated numbers") from None


def _spec(cfg) -> RotationSpec:
    return RotationSpec.golden() if cfg["rotation"] == "golden" else RotationSpec.silver()


def _system(cfg, **over):
    fam = cfg["family"]
    params = {k: cfg[k] for k in FAMILY_PARAMS[fam] if cfg.get(k) is not None}
    params.update(over)
    return make_family(fam, spec=_spec(cfg), **params)


def _factory(cfg):
    key = SWEPT.get(cfg["family"], "beta")
    return lambda b: _system(cfg, **{key: float(b)})


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    Path(path).write_text(buf.getvalue())


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return [_jsonable(v) for v in o.tolist()]
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else repr(f)
    return o


def write_json(path, schema: str, cfg: dict, body: dict) -> None:
    doc = {"schema": schema, "version": __version__,
           "config": {k: v for k, v in cfg.items() if k not in ("out", "workers")}, **body}
    Path(path).write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=1) + "\n")


def emit_svg(series, width: int = 640, height: int = 400, ylim=None, title: str | None = None) -> str:
    """Scatter plot of ``(x, y)`` series as an SVG 1.1 document.

    ``series`` is a list of ``(x, y, color)`` with ``x`` in ``[0, 1)``.
    Output is byte-identical for identical input.
    """
    total = sum(len(s[0]) for s in series)
    if total > MAX_SVG_POINTS:
        raise TooManyPoints(f"{total} points exceed the limit of {MAX_SVG_POINTS}")
    ys = [np.asarray(s[1], dtype=float) for s in series]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.array([])
    if ylim is None:
        ylim = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    y0, y1 = ylim
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    m = 40
    pw, ph = width - 2 * m, height - 2 * m
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="white" stroke="black"/>',
           f'<text x="{m}" y="{height - 12}" font-size="12">0</text>',
           f'<text x="{width - m - 8}" y="{height - 12}" font-size="12">1</text>',
           f'<text x="4" y="{m + 4}" font-size="12">{y1:.4g}</text>',
           f'<text x="4" y="{height - m}" font-size="12">{y0:.4g}</text>']
    if title:
        out.append(f'<text x="{m}" y="24" font-size="14">{_escape(title)}</text>')
    for (x, _, color), y in zip(series, ys):
        x = np.asarray(x, dtype=float)
        ok = np.isfinite(y)
        px = m + x[ok] * pw
        py = m + (y1 - np.clip(y[ok], y0, y1)) / (y1 - y0) * ph
        out.append(f'<g fill="{color}">')
        out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="0.8"/>' for a, b in zip(px, py))
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _maybe_svg(cfg, series, **kw) -> None:
    if cfg["svg"]:
        Path(cfg["out"] + ".svg").write_text(emit_svg(series, **kw))


def _prepare_out(cfg) -> None:
    Path(cfg["out"]).parent.mkdir(parents=True, exist_ok=True)


# ---------------------------------------------------------------- commands


def cmd_graph(cfg) -> int:
    from . import graphs as gr

    sys_ = _system(cfg)
    grid = gr.make_grid(cfg["grid"], sys_, cfg["orbit_points"])
    n, w = cfg["iterates"], cfg["workers"]
    kinds = ("upper", "lower", "middle") if cfg["which"] == "all" else tuple(cfg["which"].split(","))
    cols, info = {}, {}
    for k in kinds:
        if k in ("upper", "lower"):
            g = gr.iterate_boundary(sys_, k, n, grid=grid, workers=w)
            lam, res = gr.graph_lyapunov(sys_, g, tol=None, workers=w)
            info[k] = {"lyapunov": lam, "residual": res}
        elif k == "middle":
            g = gr.middle_graph(sys_, grid=grid, workers=w)
            lam, _ = gr.graph_lyapunov(sys_, g, tol=None)
            info[k] = {"lyapunov": lam, "resolution": g.resolution, "undecided": g.meta["undecided"]}
        else:
            g = gr.pullback_graph(sys_, n, 0.0, grid=grid)
            lam, _ = gr.graph_lyapunov(sys_, g, tol=None)
            info[k] = {"lyapunov": lam}
        cols[k] = g.values
    write_csv(cfg["out"] + ".csv", ["theta", *cols], zip(grid[0], *cols.values()))
    write_json(cfg["out"] + ".json", "qpflab.graph/1", cfg, {"graphs": info, "G": len(grid[0])})
    colors = {"upper": "black", "lower": "black", "middle": "gray", "pullback": "gray"}
    _maybe_svg(cfg, [(grid[0], v, colors[k]) for k, v in cols.items()])
    return 0


def cmd_lyapunov(cfg) -> int:
    from .graphs import finite_time_exponents

    hz = [int(h) for h in _floats("lyapunov", "horizons", cfg["horizons"])]
    sys_ = _system(cfg)
    prof = finite_time_exponents(sys_, cfg["theta"], cfg["x"], hz)
    write_csv(cfg["out"] + ".csv", ["n", "forward", "backward"], zip(prof.horizons, prof.forward, prof.backward))
    write_json(cfg["out"] + ".json", "qpflab.lyapunov/1", cfg,
               {"horizons": prof.horizons, "forward": prof.forward, "backward": prof.backward})
    return 0


def cmd_bifurcate(cfg) -> int:
    from .bifurcation import critical_beta

    br = critical_beta(_factory(cfg), cfg["lo"], cfg["hi"], cfg["tol"], N=max(cfg["iterates"], 1),
                       G=cfg["grid"], workers=cfg["workers"])
    write_csv(cfg["out"] + ".csv", ["lo", "hi", "width"], [(br.lo, br.hi, br.width)])
    write_json(cfg["out"] + ".json", "qpflab.bifurcate/1", cfg, {"bracket": br.as_dict()})
    return 0


def _timeset_params(cfg):
    from .timesets import TimeSetParams

    if cfg["alpha"] is None or cfg["gamma"] is None:
        raise ConfigError("run.alpha/run.gamma: both are required for time sets")
    try:
        return TimeSetParams(alpha=cfg["alpha"], gamma=cfg["gamma"], u=cfg["u"], v=cfg["v"], spec=_spec(cfg),
                             symmetric=cfg["family"] == "symmetric", strict=cfg["mode"] == "strict")
    except ValueError as e:
        raise ConfigError(f"timesets: {e}") from None


def cmd_timesets(cfg) -> int:
    from .timesets import TimeSetTable, density_functions, verify_timeset_lemmas

    P = _timeset_params(cfg)
    W = cfg["window"]
    tab = TimeSetTable(P, W, W)
    rep = verify_timeset_lemmas(tab, seed=cfg["seed"])
    dens = density_functions(P, W, tab)
    Path(cfg["out"] + ".table.json").write_text(tab.to_json() + "\n")
    write_csv(cfg["out"] + ".csv", ["lemma", "asserted", "ok", "checked"],
              [(k, r.asserted, r.ok, r.checked) for k, r in sorted(rep.results.items())])
    write_json(cfg["out"] + ".json", "qpflab.timesets/1", cfg,
               {"lemmas": rep.as_dict(), "density": dens._asdict(), "l_minus": tab.l_minus,
                "l_plus": tab.l_plus, "anomalies": sorted(set(tab.anomalies))})
    return 0 if rep.all_ok else 1


def cmd_sink_source(cfg) -> int:
    from .bifurcation import sink_source_search
    from .systems import check_hypotheses
    from .timesets import TimeSetTable

    P = _timeset_params(cfg)
    tab = TimeSetTable(P, cfg["window"], cfg["window"])
    if cfg["p_max"] >= len(tab.l_minus):
        raise ConfigError(f"sink-source.p_max: the window only reaches p={len(tab.l_minus) - 1}; enlarge window")
    hyp = check_hypotheses(_system(cfg), cfg["alpha"], cfg["gamma"])
    try:
        cands = sink_source_search(_factory(cfg), tab, cfg["p_max"], cfg["mode"], hypotheses=hyp)
    except QpfError as e:
        if cfg["mode"] == "strict":
            raise ConfigError(f"sink-source.mode: {e}") from None
        raise
    write_csv(cfg["out"] + ".csv", ["p", "beta_p", "x_p", "l_minus", "l_plus", "ok"],
              [(c.p, c.beta_p, c.x_p, c.l_minus, c.l_plus, c.ok) for c in cands])
    write_json(cfg["out"] + ".json", "qpflab.sinksource/1", cfg,
               {"candidates": [c.as_dict() for c in cands], "hypotheses": hyp.as_dict()})
    return 0 if all(c.ok for c in cands) else 1


def cmd_induction(cfg) -> int:
    from .bifurcation import no_close_return, verify_induction

    a, g = cfg["alpha"], cfg["gamma"]
    if a is None or g is None:
        raise ConfigError("run.alpha/run.gamma: both are required")
    spec = _spec(cfg)
    pairs = [(l, n) for l in range(cfg["l_max"] + 1) for n in range(1, cfg["n_max"] + 1)
             if no_close_return(spec, l, n, g, 2.0)]
    if not pairs:
        raise ConfigError("induction: no (l, n) without close returns")
    rng = np.random.default_rng(cfg["seed"])
    pick = rng.choice(len(pairs), size=cfg["samples"])
    reps = [verify_induction(_factory(cfg), pairs[i][1], a, g, l=pairs[i][0], samples=2, seed=cfg["seed"])
            for i in pick]
    write_csv(cfg["out"] + ".csv", ["l", "n", "ok", "slope"], [(r.l, r.n, r.ok, r.slope) for r in reps])
    write_json(cfg["out"] + ".json", "qpflab.induction/1", cfg, {"reports": [r.as_dict() for r in reps]})
    return 0 if all(r.ok for r in reps) else 1


def cmd_peaks(cfg) -> int:
    from .errors import ChainTooShort
    from .graphs import iterate_boundary, make_grid
    from .peaks import detect_peaks, sharpening_rate, track_peaks, write_peaks_csv

    sys_ = _system(cfg)
    grid = make_grid(cfg["grid"], sys_, cfg["orbit_points"])
    g = iterate_boundary(sys_, "upper", cfg["iterates"], grid=grid, workers=cfg["workers"])
    chains = track_peaks(detect_peaks(g, cfg["min_depth"]), sys_.spec, 2.0 / cfg["grid"])
    try:
        rate = sharpening_rate(chains[0]) if chains else None
    except ChainTooShort:
        rate = None
    write_peaks_csv(chains, cfg["out"] + ".csv")
    write_json(cfg["out"] + ".json", "qpflab.peaks/1", cfg,
               {"chains": [len(c) for c in chains], "sharpening_rate": rate})
    _maybe_svg(cfg, [(g.grid, g.values, "black")])
    return 0


def cmd_harper(cfg) -> int:
    from .graphs import iterate_boundary, make_grid, pullback_graph

    sys_ = _system(cfg)
    grid = make_grid(cfg["grid"], sys_, cfg["orbit_points"])
    att = iterate_boundary(sys_, "upper", cfg["iterates"], grid=grid, workers=cfg["workers"])
    rep = pullback_graph(sys_, cfg["iterates"], float(att.values.mean()) - 0.5, grid=grid)
    write_csv(cfg["out"] + ".csv", ["theta", "attractor", "repeller"], zip(grid[0], att.values, rep.values))
    write_json(cfg["out"] + ".json", "qpflab.harper/1", cfg, {"G": len(grid[0])})
    _maybe_svg(cfg, [(grid[0], att.values, "black"), (grid[0], rep.values, "gray")])
    return 0


def cmd_cocycle(cfg) -> int:
    from .cocycle import cocycle_lyapunov, lambda_c_curve, write_curve_csv
    from .systems import cos_2pi, peak

    lam = cfg["lam"] if cfg["lam"] is not None else 4.0
    n = max(cfg["iterates"], 1000)
    rows = []
    for E in _floats("cocycle", "energies", cfg["energies"]):
        est = cocycle_lyapunov(E, lam, cos_2pi(), _spec(cfg), n, cfg["samples"], cfg["seed"])
        rows.append((E, est.value, est.stderr))
    write_csv(cfg["out"] + ".csv", ["E", "lyapunov", "stderr"], rows)
    body = {"lam": lam, "n": n, "estimates": rows}
    if cfg["lambda_c"]:
        curve = lambda_c_curve(_floats("cocycle", "lambda_c", cfg["lambda_c"]), peak(cfg["sigma"] or 2.0),
                               _spec(cfg), cfg["tol"], G=cfg["grid"])
        write_curve_csv(curve, cfg["out"] + ".lambda_c.csv")
        body["lambda_c"] = [r._asdict() for r in curve]
    write_json(cfg["out"] + ".json", "qpflab.cocycle/1", cfg, body)
    return 0


def cmd_scaling(cfg) -> int:
    from .bifurcation import classify_and_scale, critical_beta

    f = _factory(cfg)
    br = critical_beta(f, cfg["lo"], cfg["hi"], cfg["tol"], G=cfg["grid"], workers=cfg["workers"])
    offs = _floats("scaling", "offsets", cfg["offsets"])
    cls = classify_and_scale(f, br, offs, G=4096, orbit_points=max(cfg["orbit_points"], 39),
                             workers=cfg["workers"])
    s = cls.scaling
    write_csv(cfg["out"] + ".csv", ["offset", "delta", "argmin"], zip(s.offsets, s.deltas, s.argmins))
    write_json(cfg["out"] + ".json", "qpflab.scaling/1", cfg, {"bracket": br.as_dict(), **cls.as_dict()})
    return 0


HANDLERS = {
    "graph": cmd_graph, "lyapunov": cmd_lyapunov, "bifurcate": cmd_bifurcate, "sink-source": cmd_sink_source,
    "induction": cmd_induction, "timesets": cmd_timesets, "peaks": cmd_peaks, "harper": cmd_harper,
    "cocycle": cmd_cocycle, "scaling": cmd_scaling,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpflab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, extra in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI file with [run] and [%s] sections" % name)
        for k in COMMON + extra:
            flag = "--" + k.replace("_", "-")
            if KEYS[k][0] is bool:
                sp.add_argument(flag, dest=k, action="store_const", const=True, default=None, help=KEYS[k][3])
            else:
                sp.add_argument(flag, dest=k, default=None, help=KEYS[k][3])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and 2
    try:
        cfg = load_config(args.command, args.config, vars(args))
        _prepare_out(cfg)
        return HANDLERS[args.command](cfg)
    except ConfigError as e:
        print(f"qpflab: {e}", file=sys.stderr)
        return 2
    except QpfError as e:
        print(f"qpflab: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
