"""Expansion of a run configuration into tasks and evaluation of each task.

A task is a plain dict (picklable, so it can run in a worker process) and
evaluates to a list of report rows.  Rows carry library values unchanged.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np

from . import inequalities as iq
from . import liftproof
from .classical import finite, gaussian
from .config import CHECKS, RunConfig, check_budget, expand_states, grid
from .errors import ConfigInvalid, InvalidParameter, QepiError
from .fockspace import DensityMatrix, displace, make_state, mixture
from .information import InnerProductSpec, debruijn_check

LIFT_SPECS = (InnerProductSpec("linear", 1, 0.0), InnerProductSpec("linear", 2, 0.7))


# ---------------------------------------------------------------------------
# states and variables from config specs


def build_state(spec: dict, cutoff: int, seed: int, tail: float) -> DensityMatrix:
    """Construct a state from a config entry; ``seed`` fills in a missing seed."""
    cutoff = spec.get("cutoff", cutoff)
    params = dict(spec.get("params", {}))
    family = spec["family"]
    if family == "mixture":
        parts = [build_state(c, cutoff, seed, tail) for c in spec.get("components", [])]
        if not parts:
            raise InvalidParameter("mixture needs components")
        weights = params.get("weights", [1.0] * len(parts))
        return mixture(parts, weights, label=state_label(spec))
    if family == "displaced_thermal":
        z = _complex(params.get("z", 0.0))
        base = make_state("thermal", cutoff + 20, tail_tol=tail, nbar=params["nbar"])
        return DensityMatrix(displace(base, z, cutoff).matrix, label=state_label(spec))
    if family == "random_full_support":
        params.setdefault("seed", seed)
    for key in ("alpha",):
        if key in params:
            params[key] = _complex(params[key])
    return make_state(family, cutoff, tail_tol=tail, **params)


def _complex(x) -> complex:
    if isinstance(x, list):
        return complex(x[0], x[1])
    return complex(x)


def state_label(spec: dict) -> str:
    params = spec.get("params", {})
    inner = ",".join(f"{k}={_fmt(params[k])}" for k in sorted(params))
    if spec["family"] == "mixture":
        comps = "+".join(state_label(c) for c in spec.get("components", []))
        inner = comps + (";" + inner if inner else "")
    return f"{spec['family']}({inner})"


def _fmt(x) -> str:
    if isinstance(x, list):
        return "[" + ",".join(_fmt(y) for y in x) + "]"
    return f"{x:g}" if isinstance(x, (int, float)) else str(x)


def build_variable(spec: dict):
    if spec["kind"] == "gaussian":
        mean = spec.get("mean", [0.0, 0.0])
        return gaussian(spec.get("h", 1.0), complex(mean[0], mean[1]))
    return finite([_complex(p) for p in spec["points"]], spec.get("probs"))


def variable_label(spec: dict) -> str:
    if spec["kind"] == "gaussian":
        return f"gaussian(h={_fmt(spec.get('h', 1.0))})"
    return f"finite({_fmt(spec['points'])})"


def named_collection(name: str, n: int, n_classical: int = 0) -> iq.SubsetCollection:
    """Named quantum collections; classical subsets are the matching blocks of ``[n']``."""
    if name == "singletons":
        subsets = [(k,) for k in range(1, n + 1)]
    elif name == "pairs":
        subsets = list(iq.subsets_of_size(n, 2).elements) if n >= 2 else []
        subsets = [v for v, _ in subsets]
    elif name == "leave-one-out":
        subsets = [v for v, _ in iq.subsets_of_size(n, max(n - 1, 1)).elements]
    elif name == "full":
        subsets = [tuple(range(1, n + 1))]
    else:
        raise InvalidParameter(f"unknown collection {name!r}")
    if not subsets:
        raise InvalidParameter(f"collection {name!r} is empty for n = {n}")
    if not n_classical:
        return iq.collection(n, subsets)
    if n_classical % n:
        raise InvalidParameter("n' must be a multiple of n for named collections")
    k = n_classical // n
    pairs = [(v, tuple(l for j in v for l in range((j - 1) * k + 1, j * k + 1))) for v in subsets]
    return iq.paired_collection(n, n_classical, pairs)


# ---------------------------------------------------------------------------
# task expansion


def _canon(params: dict) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


def tasks(cfg: RunConfig) -> list[dict]:
    """All sweep points of the configured checks, in a deterministic order."""
    states = expand_states(cfg["states"])
    out = []
    for check in cfg.checks:
        section = cfg[check]
        if check == "epi":
            for spec in states:
                for p in grid(eta=section["eta"]):
                    out.append({"check": check, "states": [spec, spec], "params": p})
        elif check == "monotonicity":
            for spec in states:
                for p in grid(n_max=section["n_max"]):
                    out.append({"check": check, "states": [spec], "params": p})
        elif check == "debruijn":
            for spec in states:
                out.append({"check": check, "states": [spec], "params": {}})
        elif check == "fisher-stam":
            ensembles = section.get("ensembles")
            for p in grid(n=section["n"], collection=section["collections"]):
                groups = (
                    [[_pick(states, i) for i in e] for e in ensembles]
                    if ensembles
                    else [[spec] * p["n"] for spec in states]
                )
                for group in groups:
                    if ensembles:
                        p = {**p, "n": len(group)}
                    out.append({"check": check, "states": group, "params": {**p, "mu": section["mu"]}})
        elif check == "qc-epi":
            for var in section["variables"]:
                axes = grid(n=section["n"], n_classical=section["n_classical"],
                            collection=section["collections"])
                for p in axes:
                    for spec in states:
                        out.append({
                            "check": check, "states": [spec] * p["n"], "variable": var,
                            "params": {**p, "mu": section["mu"]},
                        })
        elif check == "liftproof":
            for spec in states:
                for v in section["subsets"]:
                    out.append({"check": check, "states": [spec, spec],
                                "params": {"subset": sorted(v), "nodes": section["nodes"]}})
    check_budget(len(out), cfg)
    return out


def _pick(states, i):
    if i >= len(states):
        raise ConfigInvalid(f"ensemble refers to state {i}, only {len(states)} defined")
    return states[i]


def task_key(task: dict) -> tuple:
    return (
        CHECKS.index(task["check"]),
        "|".join(state_label(s) for s in task["states"]),
        _canon(task.get("variable", {})),
        _canon(task["params"]),
    )


# ---------------------------------------------------------------------------
# evaluation


def _row(task, cfg_data, name, **values) -> dict:
    labels = [state_label(s) for s in task["states"]]
    family = labels[0] if len(set(labels)) == 1 else "|".join(labels)
    if "variable" in task:
        family += " * " + variable_label(task["variable"])
    row = {
        "check": name,
        "family": family,
        "params": _canon(task["params"]),
        "n": len(task["states"]),
        "cutoff": values.pop("cutoff", cfg_data["cutoff"]),
        "lhs": math.nan,
        "rhs": math.nan,
        "margin": math.nan,
        "tolerance": math.nan,
        "pass": "skip",
        "trace_deficit": math.nan,
        "quad_err": math.nan,
        "note": "",
    }
    row.update(values)
    return row


def _margin_row(task, cfg_data, m: iq.InequalityMargin, **extra) -> dict:
    return _row(
        task, cfg_data, m.name, lhs=m.lhs, rhs=m.rhs, margin=m.margin, tolerance=m.tolerance,
        **{"pass": "pass" if m.passed else "fail"},
        trace_deficit=m.trace_deficit, quad_err=m.quad_error, **extra,
    )


def _identity_row(task, cfg_data, name, lhs, rhs, residual, tol, deficit=math.nan, quad=math.nan,
                  **extra) -> dict:
    margin = -abs(residual)
    return _row(
        task, cfg_data, name, lhs=float(np.real(lhs)), rhs=float(np.real(rhs)), margin=margin,
        tolerance=tol, **{"pass": "pass" if margin >= -tol else "fail"},
        trace_deficit=deficit, quad_err=quad, **extra,
    )


def _gate(rows: list[dict], gates: dict, check: str) -> list[dict]:
    """Mark rows whose diagnostics exceed the gates as skipped."""
    quad_gate = gates["lift_quad_error"] if check == "liftproof" else gates["quad_error"]
    for row in rows:
        if row["pass"] == "skip":
            continue
        notes = []
        if row["trace_deficit"] > gates["trace_deficit"]:
            notes.append(f"trace_deficit {row['trace_deficit']:.2e} above gate")
        if row["quad_err"] > quad_gate:
            notes.append(f"quad_err {row['quad_err']:.2e} above gate")
        if notes:
            row["pass"] = "skip"
            row["note"] = "; ".join(notes)
    return rows


def evaluate(task: dict, cfg_data: dict) -> list[dict]:
    """Evaluate one task; numerical errors become a single skipped row."""
    start = time.perf_counter()
    try:
        rows = _evaluate(task, cfg_data)
        rows = _gate(rows, cfg_data["gates"], task["check"])
    except QepiError as exc:
        rows = [_row(task, cfg_data, task["check"], note=f"{type(exc).__name__}: {exc}")]
    elapsed = time.perf_counter() - start
    for row in rows:
        row["wall_time"] = elapsed / len(rows)
    return rows


def _evaluate(task: dict, cfg: dict) -> list[dict]:
    tol, seed, tail = cfg["tolerances"], cfg["seed"], cfg["gates"]["tail"]
    check, p = task["check"], task["params"]
    if check == "liftproof":
        return _liftproof_rows(task, cfg)
    states = [build_state(s, cfg["cutoff"], seed, tail) for s in task["states"]]
    cutoff = max(s.cutoff for s in states)
    if check == "epi":
        return [
            _margin_row(task, cfg, m, cutoff=cutoff)
            for m in iq.epi_basic(states[0], states[1], p["eta"], tol["entropy"])
        ]
    if check == "monotonicity":
        margins = iq.guha_monotonicity(states[0], p["n_max"], tol["entropy"])
        return [
            _margin_row(task, cfg, m, cutoff=cutoff, params=_canon({**p, "n": m.details["n"]}))
            for m in margins
        ]
    if check == "debruijn":
        res = debruijn_check(states[0])
        return [_identity_row(task, cfg, "debruijn", res.derivative, res.fisher, res.residual,
                              tol["debruijn"], states[0].trace_deficit, cutoff=cutoff,
                              note=f"step={res.step:.0e}")]
    mu = p["mu"]
    if check == "fisher-stam":
        c = named_collection(p["collection"], p["n"])
        mu = iq.uniform_weights(c) if mu == "uniform" else mu
        out = [_margin_row(task, cfg, iq.theorem1_check(states, c, tol["entropy"]), cutoff=cutoff)]
        out.append(_margin_row(task, cfg, iq.theorem2_check(states, c, mu, tol["fisher"]),
                               cutoff=cutoff))
        return out
    if check == "qc-epi":
        q = cfg["quadrature"]
        c = named_collection(p["collection"], p["n"], p["n_classical"])
        xs = [build_variable(task["variable"])] * p["n_classical"]
        mu = iq.uniform_weights(c) if mu == "uniform" else mu
        m3 = iq.theorem3_check(states, xs, c, tol["entropy"], nodes=q["nodes"])
        m4 = iq.theorem4_check(states, xs, c, mu, tol["fisher"], nodes=q["nodes"])
        return [_margin_row(task, cfg, m, cutoff=cutoff) for m in (m3, m4)]
    raise InvalidParameter(f"unknown check {check!r}")


def _random_operator(rng, cutoff: int) -> np.ndarray:
    return rng.standard_normal((cutoff + 1,) * 2) + 1j * rng.standard_normal((cutoff + 1,) * 2)


def _liftproof_rows(task: dict, cfg: dict) -> list[dict]:
    section, tol = cfg["liftproof"], cfg["tolerances"]
    cutoff = section["state_cutoff"]
    spec = task["states"][0]
    # the identities are checked on the renormalised truncation, which is itself a state
    raw = build_state({**spec, "cutoff": cutoff}, cutoff, cfg["seed"], None)
    dropped = 1.0 - raw.trace()
    rho = DensityMatrix(raw.matrix / raw.trace(), label=raw.label)
    v = tuple(task["params"]["subset"])
    nodes = task["params"]["nodes"]
    rng = np.random.default_rng(cfg["seed"])
    t_op, r_op = _random_operator(rng, 3), _random_operator(rng, 3)
    rows = []
    for ip in LIFT_SPECS:
        note = f"spec={ip}; renormalised after dropping {dropped:.1e}"
        c = liftproof.prop1_check(t_op, r_op, rho, rho, v, ip, nodes)
        rows.append(_identity_row(task, cfg, "lift_inner", c.lhs, c.rhs, c.residual, tol["lift"],
                                  rho.trace_deficit, c.quad_error, cutoff=cutoff, note=note))
        c = liftproof.lemma2_check(rho, rho, r_op, v, ip, nodes)
        rows.append(_identity_row(task, cfg, "lift_score", c.lhs, c.rhs, c.residual, tol["lift"],
                                  rho.trace_deficit, c.quad_error, cutoff=cutoff, note=note))
    if v == (1,):
        # projector identities on three small registers
        small = [build_state({**spec, "cutoff": 2}, 2, cfg["seed"], None)] * 3
        ops = [_random_operator(rng, 26) for _ in range(2)]
        rep = liftproof.projector_decomposition_check(small, ops, LIFT_SPECS[0])
        rows.append(_identity_row(task, cfg, "projector_decomposition", 0.0, 0.0, rep.worst,
                                  tol["projector"], cutoff=2, note="registers=3"))
    return rows
