"""Command-line front end.

Three verbs, all driven by an INI-style config (key = value with sections):

    levyhedge sweep     --config run.ini [--out sweep.csv] [--fft|--quadrature]
    levyhedge verify    --config run.ini [--seed N] [--paths N]
    levyhedge calibrate --quotes quotes.csv --family merton --config run.ini

Exit codes: 0 success, 1 invariant/verification failure, 2 configuration
error.  CSV output is deterministic for a fixed config and starts with a
'#'-prefixed digest of the resolved configuration.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import calibration as cal
from . import hedging, oracle_mc
from .fourier import FourierConfig, MODE_FFT, MODE_QUAD, char_fn
from .levy_core import (
    AssumptionError,
    LevyIntegrabilityError,
    LevyModel,
    MmmModel,
    StripError,
    ZeroMeasure,
    c2_split,
    compute_mu_s,
    to_mmm,
)
from .models import MertonParams, VgParams, merton_model, vg_from_kappa, vg_model

__all__ = ["main", "load_run_config", "verify_report", "RunConfig"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    family: str
    model: LevyModel
    spot: float
    maturity: float
    valuation_time: float
    chis: Tuple[float, ...]
    fourier: FourierConfig
    n_paths: int
    seed: int
    out: Optional[str]
    digest: str

    @property
    def horizon(self) -> float:
        return self.maturity - self.valuation_time


def _mu_for_mid_mu_s(build) -> float:
    """Drift putting mu_s mid-range of its admissible interval."""
    probe = build(0.0)
    mu_s0 = compute_mu_s(probe)
    c2p, c2m = c2_split(probe)
    return -(probe.sigma**2 + c2p + c2m) / 2.0 - mu_s0


def _build_model(section: configparser.SectionProxy, spot: float) -> Tuple[str, LevyModel]:
    family = section.get("family", "").strip().lower()
    if family == "merton":
        sigma = section.getfloat("sigma")
        gamma = section.getfloat("gamma")
        m = section.getfloat("m")
        delta = section.getfloat("delta")
        if None in (sigma, gamma, m, delta):
            raise ConfigError("merton model needs sigma, gamma, m, delta")

        def build(mu):
            return merton_model(MertonParams(mu=mu, sigma=sigma, gamma=gamma,
                                             m=m, delta=delta), s0=spot)

        mu = section.getfloat("mu")
        if mu is None:
            mu = _mu_for_mid_mu_s(build)
        return family, build(mu)
    if family == "vg":
        if section.get("c_par") is not None:
            params = VgParams(c_par=section.getfloat("c_par"),
                              g_par=section.getfloat("g_par"),
                              m_par=section.getfloat("m_par"))
        elif section.get("kappa") is not None:
            params = vg_from_kappa(section.getfloat("kappa"),
                                   section.getfloat("m"),
                                   section.getfloat("delta"))
        else:
            raise ConfigError("vg model needs (c_par, g_par, m_par) or (kappa, m, delta)")
        return family, vg_model(params, s0=spot)
    if family == "bs":
        sigma = section.getfloat("sigma")
        if sigma is None:
            raise ConfigError("bs model needs sigma")
        mu = section.getfloat("mu")
        if mu is None:
            mu = -0.5 * sigma * sigma
        return family, LevyModel(mu=mu, sigma=sigma, measure=ZeroMeasure(), s0=spot)
    raise ConfigError(f"unknown model family {family!r}")


def _parse_chis(cp: configparser.ConfigParser, spot: float) -> Tuple[float, ...]:
    if not cp.has_section("strikes"):
        raise ConfigError("config needs a [strikes] section")
    sec = cp["strikes"]
    if sec.get("chis") is not None:
        chis = tuple(float(t) for t in sec.get("chis").replace(",", " ").split())
    else:
        k_min = sec.getfloat("k_min")
        k_max = sec.getfloat("k_max")
        k_step = sec.getfloat("k_step")
        if None in (k_min, k_max, k_step) or k_step <= 0:
            raise ConfigError("strikes need chis or k_min/k_max/k_step")
        strikes = np.arange(k_min, k_max + 1e-9 * k_step, k_step)
        chis = tuple(float(k) / spot for k in strikes)
    if not chis:
        raise ConfigError("strike grid is empty")
    if any(c <= 0 for c in chis) or any(b <= a for a, b in zip(chis, chis[1:])):
        raise ConfigError("moneyness grid must be positive and ascending")
    return chis


def load_run_config(path, mode_override: Optional[str] = None,
                    seed_override: Optional[int] = None,
                    paths_override: Optional[int] = None,
                    out_override: Optional[str] = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        if not cp.has_section("model"):
            raise ConfigError("config needs a [model] section")
        spot = cp["model"].getfloat("spot", fallback=1.0)
        family, model = _build_model(cp["model"], spot)
        maturity = cp.getfloat("horizon", "maturity", fallback=1.0)
        valuation = cp.getfloat("horizon", "valuation_time", fallback=0.95)
        if not (0.0 <= valuation < maturity):
            raise ConfigError("need 0 <= valuation_time < maturity")
        chis = _parse_chis(cp, spot)
        fsec = cp["fourier"] if cp.has_section("fourier") else {}
        mode = mode_override or (fsec.get("mode", MODE_QUAD) if fsec else MODE_QUAD)
        fourier = FourierConfig(
            n_grid=int(fsec.get("n_grid", 2**14)) if fsec else 2**14,
            eta=float(fsec.get("eta", 0.025)) if fsec else 0.025,
            alpha=float(fsec.get("alpha", 1.75)) if fsec else 1.75,
            mode=mode)
        n_paths = cp.getint("mc", "n_paths", fallback=1_000_000)
        seed = cp.getint("mc", "seed", fallback=0)
        out = cp.get("output", "path", fallback=None)
    except (ValueError, TypeError, configparser.Error) as exc:
        raise ConfigError(str(exc)) from exc
    if seed_override is not None:
        seed = seed_override
    if paths_override is not None:
        n_paths = paths_override
    if out_override is not None:
        out = out_override

    canon = []
    for section in sorted(cp.sections()):
        for key in sorted(cp[section]):
            canon.append(f"{section}.{key}={cp[section][key]}")
    canon.append(f"resolved.mode={fourier.mode}")
    canon.append(f"resolved.seed={seed}")
    canon.append(f"resolved.n_paths={n_paths}")
    digest = hashlib.sha256("\n".join(canon).encode()).hexdigest()
    return RunConfig(family=family, model=model, spot=spot, maturity=maturity,
                     valuation_time=valuation, chis=chis, fourier=fourier,
                     n_paths=n_paths, seed=seed, out=out, digest=digest)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return repr(float(x))


def cmd_sweep(rc: RunConfig, out_path: Optional[str]) -> int:
    mmm = to_mmm(rc.model)
    phi = char_fn(mmm, rc.horizon)
    points = hedging.sweep(mmm, phi, rc.chis, rc.fourier)
    lines = [f"# config-digest: {rc.digest}",
             "chi,i1,i2,lrm,delta,diff,bound_t3,bound_t4,flags"]
    for p in points:
        flags = ";".join(p.flags)
        lines.append(",".join([
            _fmt(p.chi), _fmt(p.i1), _fmt(p.i2), _fmt(p.lrm), _fmt(p.delta),
            _fmt(p.diff), _fmt(p.bound_t3), _fmt(p.bound_t4), flags]))
    text = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    bad = [p for p in points if not p.ok]
    if bad:
        print(f"sweep: {len(bad)} point(s) failed invariants", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def verify_report(mmm: MmmModel, phi, chis: Sequence[float],
                  fcfg: FourierConfig, mcfg: oracle_mc.McConfig,
                  spot: float = 1.0) -> Tuple[List[dict], bool]:
    """Side-by-side Fourier vs Monte Carlo rows; pass = within 3 SE.

    ``phi`` is injectable so a deliberately mis-specified characteristic
    function shows up as a martingale/band failure.
    """
    from .fourier import (
        call_price,
        i1 as f_i1,
        i2 as f_i2,
        tail_lower as f_tail_lo,
        tail_upper as f_tail,
    )

    sample = oracle_mc.simulate_log_returns(mmm, mcfg)
    rows: List[dict] = []
    eL = np.exp(sample.log_returns)
    se = float(eL.std(ddof=1) / math.sqrt(eL.size))
    rows.append({"chi": "", "quantity": "martingale mean(e^L)",
                 "fourier": 1.0, "mc": float(eL.mean()), "se": se,
                 "z": (float(eL.mean()) - 1.0) / se})
    for chi in chis:
        tl = oracle_mc.tail_upper_from_sample(sample, chi)
        pairs = [
            ("i1", f_i1(phi, chi, fcfg), oracle_mc.i1_from_sample(sample, chi)),
            ("tail_upper", f_tail(phi, chi, fcfg), tl),
            ("tail_lower", f_tail_lo(phi, chi, fcfg),
             oracle_mc.McEstimate(1.0 - tl.value, tl.se)),
            ("price", call_price(phi, spot, chi * spot, fcfg) / spot,
             oracle_mc.price_from_sample(sample, chi)),
        ]
        e2 = oracle_mc.i2_from_sample(mmm, sample, chi)
        v2 = f_i2(mmm, phi, chi, fcfg)
        band2 = max(e2.se + e2.x_quad_err, 1e-15)
        pairs.append(("i2", v2, oracle_mc.McEstimate(e2.value, band2)))
        # zero-variance (all-identical) draws get the rule-of-three floor 1/n
        se_floor = 1.0 / sample.n_paths
        for name, fv, est in pairs:
            z = (fv - est.value) / max(est.se, se_floor)
            rows.append({"chi": chi, "quantity": name, "fourier": fv,
                         "mc": est.value, "se": est.se, "z": z})
    ok = all(abs(r["z"]) <= 3.0 for r in rows)
    return rows, ok


def cmd_verify(rc: RunConfig) -> int:
    mmm = to_mmm(rc.model)
    phi = char_fn(mmm, rc.horizon)
    mcfg = oracle_mc.McConfig(n_paths=rc.n_paths, seed=rc.seed,
                              horizon=rc.horizon)
    rows, ok = verify_report(mmm, phi, rc.chis, rc.fourier, mcfg)
    print(f"# config-digest: {rc.digest}")
    print(f"{'chi':>8} {'quantity':>22} {'fourier':>14} {'mc':>14} "
          f"{'se':>10} {'z':>7} pass")
    for r in rows:
        chi = f"{r['chi']:.4f}" if r["chi"] != "" else ""
        flag = "ok" if abs(r["z"]) <= 3.0 else "FAIL"
        print(f"{chi:>8} {r['quantity']:>22} {r['fourier']:>14.8f} "
              f"{r['mc']:>14.8f} {r['se']:>10.2e} {r['z']:>+7.2f} {flag}")
    print(f"verify: {'all within 3 SE' if ok else 'BAND VIOLATIONS'}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------

def _init_params(cp: configparser.ConfigParser, family: str):
    if not cp.has_section("calibration"):
        raise ConfigError("config needs a [calibration] section with init_* keys")
    sec = cp["calibration"]
    try:
        if family == "merton":
            sigma = sec.getfloat("init_sigma")
            gamma = sec.getfloat("init_gamma")
            m = sec.getfloat("init_m")
            delta = sec.getfloat("init_delta")
            if None in (sigma, gamma, m, delta):
                raise ConfigError(
                    "merton init needs init_sigma, init_gamma, init_m, init_delta")
            mu = sec.getfloat("init_mu")
            if mu is None:
                mu = _mu_for_mid_mu_s(
                    lambda mu_: merton_model(MertonParams(
                        mu=mu_, sigma=sigma, gamma=gamma, m=m, delta=delta)))
            return MertonParams(mu=mu, sigma=sigma, gamma=gamma, m=m, delta=delta)
        if family == "vg":
            if sec.get("init_c_par") is not None:
                return VgParams(c_par=sec.getfloat("init_c_par"),
                                g_par=sec.getfloat("init_g_par"),
                                m_par=sec.getfloat("init_m_par"))
            if sec.get("init_kappa") is not None:
                return vg_from_kappa(sec.getfloat("init_kappa"),
                                     sec.getfloat("init_m"),
                                     sec.getfloat("init_delta"))
            raise ConfigError("vg init needs init_c_par/g_par/m_par or kappa form")
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown calibration family {family!r}")


def cmd_calibrate(config_path, quotes_path, family: str,
                  out_path: Optional[str]) -> int:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not cp.read(config_path):
        raise ConfigError(f"cannot read config file {config_path}")
    init = _init_params(cp, family)
    try:
        quotes = cal.read_quotes(quotes_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"quote file error: {exc}") from exc
    result = cal.calibrate(family, quotes, init)
    if out_path:
        cal.write_result(out_path, result)
    rep = result.constraint_report
    print(f"family = {family}")
    print(f"params = {result.params}")
    print(f"rmse = {result.rmse:.6g}")
    print(f"iterations = {result.iterations}, converged = {result.converged}")
    print(f"constraints ok = {rep.ok} (mu_s = {rep.mu_s:.6g}, "
          f"lower bound = {rep.lower:.6g}) {rep.notes}")
    return EXIT_OK if result.converged and rep.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levyhedge",
                                 description="hedging strategies and bounds "
                                             "for exponential Levy models")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="strategy/bound sweep over a strike grid")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", default=None)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--fft", action="store_true", help="FFT batch mode")
    g.add_argument("--quadrature", action="store_true",
                   help="per-point adaptive quadrature (default)")

    vp = sub.add_parser("verify", help="Fourier vs Monte Carlo cross-check")
    vp.add_argument("--config", required=True)
    vp.add_argument("--seed", type=int, default=None)
    vp.add_argument("--paths", type=int, default=None)

    cp_ = sub.add_parser("calibrate", help="fit model parameters to call quotes")
    cp_.add_argument("--config", required=True)
    cp_.add_argument("--quotes", required=True)
    cp_.add_argument("--family", required=True, choices=["merton", "vg"])
    cp_.add_argument("--out", default=None)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            mode = MODE_FFT if args.fft else (MODE_QUAD if args.quadrature else None)
            rc = load_run_config(args.config, mode_override=mode,
                                 out_override=args.out)
            return cmd_sweep(rc, rc.out)
        if args.command == "verify":
            rc = load_run_config(args.config, seed_override=args.seed,
                                 paths_override=args.paths)
            return cmd_verify(rc)
        if args.command == "calibrate":
            return cmd_calibrate(args.config, args.quotes, args.family, args.out)
    except (ConfigError, AssumptionError, LevyIntegrabilityError,
            StripError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
