"""Plan documents.

A plan is written as TOML in which every real number is a quoted decimal string
with 17 significant digits (``format(x, ".17g")``), so that reading it back
recovers the binary64 value exactly and the text is stable across runs.

Layout::

    format = "cheese-lab-plan/1"

    [header]          build parameters, hole count, radius sum
    [[cover]]         index, kind, center_re, center_im, radius
    [[family]]        one row per hole family (placed or skipped)
    [[hole]]          in enumeration order: family_type, family_index, k, center, radius
    [lambda]          thm15 only: excluded_length
    [[lambda.arc]]    start, end (radians)
    [gamma]           thm15 only: "<cover index>" = gamma
"""
from __future__ import annotations

from pathlib import Path

import tomli

from .builder import (CheesePlan, CoverDisc, FamilyRecord, LabeledHole, LambdaSet, build_plan)
from .geometry import AngularInterval, Disc

FORMAT = "cheese-lab-plan/1"


class PlanFormatError(ValueError):
    pass


def dec(x: float) -> str:
    return format(float(x), ".17g")


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _kv(key: str, value) -> str:
    if isinstance(value, bool):
        v = "true" if value else "false"
    elif isinstance(value, int):
        v = str(value)
    elif isinstance(value, float):
        v = _q(dec(value))
    else:
        v = _q(str(value))
    return f"{key} = {v}"


def plan_to_text(plan: CheesePlan) -> str:
    out = [_kv("format", FORMAT), "", "[header]"]
    for k, v in (("mode", plan.mode), ("N", plan.N), ("r", plan.r), ("m_per_family", plan.m_per_family),
                 ("seed", plan.seed), ("mesh", plan.mesh), ("s_min", plan.s_min),
                 ("rho_max", plan.rho_max), ("outer_radius", plan.outer.radius),
                 ("hole_count", len(plan.holes)), ("radius_sum", plan.radius_sum)):
        out.append(_kv(k, v))
    for c in plan.covers:
        out += ["", "[[cover]]", _kv("index", c.index), _kv("kind", c.kind),
                _kv("center_re", c.disc.center.real), _kv("center_im", c.disc.center.imag),
                _kv("radius", c.disc.radius)]
    for f in plan.families:
        out += ["", "[[family]]", _kv("family_type", f.family_type), _kv("index", f.index),
                _kv("center_re", f.center.real), _kv("center_im", f.center.imag),
                _kv("radius", f.radius), _kv("working_inner", f.working_inner),
                _kv("delta", f.delta), _kv("budget", f.budget), _kv("placed_eps", f.placed_eps),
                _kv("count", f.count), _kv("status", f.status)]
    for h in plan.holes:
        out += ["", "[[hole]]", _kv("family_type", h.family_type), _kv("family_index", h.family_index),
                _kv("k", h.k), _kv("center_re", h.disc.center.real),
                _kv("center_im", h.disc.center.imag), _kv("radius", h.disc.radius)]
    if plan.lambda_set is not None:
        out += ["", "[lambda]", _kv("excluded_length", plan.lambda_set.excluded_length)]
        for a in plan.lambda_set.arcs:
            out += ["", "[[lambda.arc]]", _kv("start", a.theta_start), _kv("end", a.theta_end)]
    if plan.gammas:
        out += ["", "[gamma]"]
        out += [_kv(_q(str(k)), v) for k, v in sorted(plan.gammas.items())]
    return "\n".join(out) + "\n"


def _f(s) -> float:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise PlanFormatError(f"expected a decimal string, got {s!r}")
    return float(s)


def plan_from_text(text: str) -> CheesePlan:
    try:
        d = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise PlanFormatError(str(exc)) from None
    if d.get("format") != FORMAT:
        raise PlanFormatError(f"unsupported plan format {d.get('format')!r}")
    try:
        h = d["header"]
        covers = [CoverDisc(c["index"], Disc(complex(_f(c["center_re"]), _f(c["center_im"])),
                                             _f(c["radius"])), c["kind"]) for c in d.get("cover", [])]
        families = [FamilyRecord(f["family_type"], f["index"],
                                 complex(_f(f["center_re"]), _f(f["center_im"])), _f(f["radius"]),
                                 _f(f["working_inner"]), _f(f["delta"]), _f(f["budget"]),
                                 _f(f["placed_eps"]), f["count"], f["status"])
                    for f in d.get("family", [])]
        holes = [LabeledHole(Disc(complex(_f(x["center_re"]), _f(x["center_im"])), _f(x["radius"])),
                             x["family_type"], x["family_index"], x["k"]) for x in d.get("hole", [])]
        lam = None
        if "lambda" in d:
            arcs = tuple(AngularInterval(_f(a["start"]), _f(a["end"])) for a in d["lambda"].get("arc", []))
            lam = LambdaSet(arcs, _f(d["lambda"]["excluded_length"]))
        gammas = {int(k): _f(v) for k, v in d.get("gamma", {}).items()}
        return CheesePlan(h["mode"], h["N"], _f(h["r"]), h["m_per_family"], h["seed"], _f(h["mesh"]),
                          _f(h["s_min"]), _f(h["rho_max"]), Disc(0j, _f(h["outer_radius"])),
                          covers, holes, families, lam, gammas)
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanFormatError(f"malformed plan: {exc!r}") from None


def write_plan(plan: CheesePlan, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(plan_to_text(plan), encoding="utf-8", newline="\n")
    return p


def read_plan(path) -> CheesePlan:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PlanFormatError(f"cannot read plan {path}: {exc}") from None
    return plan_from_text(text)


def plan_for_config(cfg) -> CheesePlan:
    return build_plan(cfg.mode, cfg.N, cfg.r, cfg.m_per_family, seed=cfg.seed, mesh=cfg.mesh,
                      s_min=cfg.s_min, rho_max=max(cfg.effective_rho_max, 0.0))
