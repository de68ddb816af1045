"""Run configuration files.

An INI file with one section per pipeline stage.  Angles are radians unless
suffixed with ``deg`` (``105deg``).  Every key has a default, so an empty file
describes a valid run; :func:`resolve` materializes all of them.

Example::

    [reservoir]
    preset = two_step           ; two-step walk with the hardware q-plates
    coin = 2.86, 3.69, 5.28     ; zeta, theta, phi of the coin
    projection = 0, 0           ; HWP/QWP angles preparing the projection polarization
    # projection_amplitudes = 0.6, 0.8j
    # cutoff = 2

    # preset = custom
    # steps = 2
    # step1.qplate = 105deg, 90deg
    # step2.coin = 0.1, 0.2, 0.3
    # step2.qplate = 336deg, 180deg

    [sampling]
    shots = 1e4                 ; or inf
    sampling = poisson          ; poisson | multinomial | exact
    features = raw              ; raw | conditional
    intercept = on

    [estimator]
    rcond = 1e-10
    ridge = 0

    [harness]
    pool_size = 450
    test_size = 150
    ntrain = 2:5, 10:100:10     ; comma list; a:b and a:b:step ranges are inclusive
    repetitions = 500
    seed = 0
    fixed_records = off
    observables = sigma_x, sigma_y, sigma_z

    [optimize]
    criterion = sigma_min       ; sigma_min | val_mse
    budget = 500
    seed = 0
    val_reps = 5
    val_ntrain = 100

    [simulate]
    prep = random               ; or zeta1, theta1
    weights =                   ; weights JSON; empty trains a readout first

    [train]
    data = data.csv             ; p_* feature columns, o_<observable> targets
"""
import configparser
import io
import json
import math

import numpy as np

from .harness import CoinBounds, ExperimentConfig, ValidationSettings
from .optics import CoinParams, OAMSpace, QPlateParams
from .quantum import PolarizationState, PrepParams, input_state
from .reservoir import ConfigurationError, WalkConfig, WalkStep, two_step_walk

DEFAULTS = {
    "reservoir": {
        "preset": "two_step",
        "coin": "2.86, 3.69, 5.28",
        "projection": "0, 0",
    },
    "sampling": {
        "shots": "1e4",
        "sampling": "poisson",
        "features": "raw",
        "intercept": "on",
    },
    "estimator": {
        "rcond": "1e-10",
        "ridge": "0",
    },
    "harness": {
        "pool_size": "450",
        "test_size": "150",
        "ntrain": "2:5, 10:100:10",
        "repetitions": "500",
        "seed": "0",
        "fixed_records": "off",
        "observables": "sigma_x, sigma_y, sigma_z",
    },
    "optimize": {
        "criterion": "sigma_min",
        "budget": "500",
        "seed": "0",
        "val_reps": "5",
        "val_ntrain": "100",
        "zeta_bounds": "0, 360deg",
        "theta_bounds": "0, 360deg",
        "phi_bounds": "0, 360deg",
    },
    "simulate": {
        "prep": "random",
        "weights": "",
    },
    "train": {
        "data": "",
    },
}

_BOOL = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def parse_angle(text):
    t = text.strip().lower()
    if t.endswith("deg"):
        return math.radians(float(t[:-3]))
    return float(t)


def parse_angles(text, count=None):
    vals = [parse_angle(t) for t in text.split(",")]
    if count is not None and len(vals) != count:
        raise ConfigurationError(f"expected {count} angles, got {text!r}")
    if not all(np.isfinite(vals)):
        raise ConfigurationError(f"angles must be finite: {text!r}")
    return vals


def parse_bool(text):
    try:
        return _BOOL[text.strip().lower()]
    except KeyError:
        raise ConfigurationError(f"expected on/off, got {text!r}") from None


def parse_shots(text):
    t = text.strip().lower()
    if t in ("inf", "infinite"):
        return math.inf
    v = float(t)
    if not v > 0:
        raise ConfigurationError(f"shots must be positive, got {text!r}")
    return v


def parse_int_list(text):
    """``"2:5, 10:100:10"`` -> [2, 3, 4, 5, 10, 20, ..., 100]."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) not in (2, 3) or (len(bits) == 3 and bits[2] < 1):
                raise ConfigurationError(f"bad range {part!r}")
            lo, hi = bits[0], bits[1]
            step = bits[2] if len(bits) == 3 else 1
            out.extend(range(lo, hi + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise ConfigurationError(f"empty integer list {text!r}")
    return out


def parse_complex_pair(text):
    parts = [complex(t.strip().replace(" ", "")) for t in text.split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"expected two amplitudes, got {text!r}")
    return parts


def load(path):
    """Read an INI config or a run manifest (``.json``) into a ConfigParser."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    if str(path).endswith(".json"):
        try:
            cp.read_dict(json.loads(text)["config"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigurationError(f"{path} is not a run manifest: {exc}") from None
    else:
        try:
            cp.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse {path}: {exc}".replace("\n", " ")) from None
    return cp


def resolve(cp=None, overrides=None):
    """Materialize every default; ``overrides`` maps ``(section, key)`` to a string."""
    out = {sec: dict(keys) for sec, keys in DEFAULTS.items()}
    if cp is not None:
        for sec in cp.sections():
            if sec not in out:
                raise ConfigurationError(f"unknown config section [{sec}]")
            out[sec].update(cp[sec])
    for (sec, key), val in (overrides or {}).items():
        out[sec][key] = str(val)
    if out["reservoir"]["preset"] == "custom":
        out["reservoir"].pop("coin", None)
    if "projection_amplitudes" in out["reservoir"]:
        out["reservoir"].pop("projection", None)
    return out


def walk_from(res):
    r = res["reservoir"]
    if "projection_amplitudes" in r:
        pol = PolarizationState(*parse_complex_pair(r["projection_amplitudes"]))
        if abs(pol.norm - 1) > 1e-9:
            raise ConfigurationError("projection_amplitudes must be normalized")
    else:
        pol = input_state(PrepParams(*parse_angles(r["projection"], 2)))
    cutoff = int(r["cutoff"]) if "cutoff" in r else None
    preset = r.get("preset", "two_step")
    if preset == "two_step":
        return two_step_walk(CoinParams(*parse_angles(r["coin"], 3)), pol, cutoff)
    if preset != "custom":
        raise ConfigurationError(f"unknown reservoir preset {preset!r}")
    steps = []
    for k in range(1, int(r.get("steps", "0")) + 1):
        if f"step{k}.qplate" not in r:
            raise ConfigurationError(f"missing step{k}.qplate")
        qp = QPlateParams(*parse_angles(r[f"step{k}.qplate"], 2))
        coin = CoinParams(*parse_angles(r[f"step{k}.coin"], 3)) if f"step{k}.coin" in r else None
        steps.append(WalkStep(qp, coin))
    return WalkConfig(tuple(steps), pol, None if cutoff is None else OAMSpace(cutoff))


def experiment_from(res):
    h, s, e = res["harness"], res["sampling"], res["estimator"]
    try:
        return ExperimentConfig(
            walk=walk_from(res),
            n_train_grid=tuple(parse_int_list(h["ntrain"])),
            pool_size=int(h["pool_size"]),
            test_size=int(h["test_size"]),
            repetitions=int(h["repetitions"]),
            shots=parse_shots(s["shots"]),
            sampling=s["sampling"],
            features=s["features"],
            intercept=parse_bool(s["intercept"]),
            master_seed=int(h["seed"]),
            observables=tuple(o.strip() for o in h["observables"].split(",")),
            fixed_records=parse_bool(h["fixed_records"]),
            rcond=float(e["rcond"]),
            ridge=float(e["ridge"]),
        )
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def validation_from(res):
    s, o = res["sampling"], res["optimize"]
    shots = parse_shots(s["shots"])
    return ValidationSettings(
        shots=shots,
        sampling="exact" if math.isinf(shots) else s["sampling"],
        features="exact" if math.isinf(shots) and s["features"] == "raw" else s["features"],
        intercept=parse_bool(s["intercept"]),
        n_train=int(o["val_ntrain"]),
        repetitions=int(o["val_reps"]),
        observables=tuple(x.strip() for x in res["harness"]["observables"].split(",")),
    )


def bounds_from(res):
    o = res["optimize"]
    return CoinBounds(
        tuple(parse_angles(o["zeta_bounds"], 2)),
        tuple(parse_angles(o["theta_bounds"], 2)),
        tuple(parse_angles(o["phi_bounds"], 2)),
    )


def walk_to_ini(walk):
    """Reservoir section text reproducing ``walk`` exactly (radians, full precision)."""
    cp = configparser.ConfigParser()
    sec = {"preset": "custom", "steps": str(len(walk.steps)), "cutoff": str(walk.oam.cutoff_N)}
    for k, step in enumerate(walk.steps, 1):
        sec[f"step{k}.qplate"] = ", ".join(repr(float(x)) for x in (step.qplate.alpha, step.qplate.delta))
        if step.coin is not None:
            sec[f"step{k}.coin"] = ", ".join(repr(float(x)) for x in (step.coin.zeta, step.coin.theta, step.coin.phi))
    pol = walk.projection_pol
    sec["projection_amplitudes"] = f"{pol.amp_L!r}, {pol.amp_R!r}"
    cp["reservoir"] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
