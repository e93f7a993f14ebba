"""Command-line front end: lattice counts, spectrum experiments, layer sweeps, selftest.

Exit codes: 0 success, 1 internal error, 2 invalid input, 3 missing data.
Every subcommand honors --seed, --out, --json-summary and --deterministic;
flags override values from an optional flat `key = value` config file.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, lattice, population, selfcheck, simulate, spectral
from .data import read_cifar10, write_run_summary, write_spectrum_csv
from .lattice import BudgetExceededError
from .records import RunSummary, SpectrumEstimate

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_MISSING_DATA = 3


class CLIError(Exception):
    """Invalid input; maps to exit code 2."""


class MissingDataError(Exception):
    """A required dataset or file is absent; maps to exit code 3."""


def _parse_exponents(text: str) -> tuple[float, ...]:
    out = []
    for token in text.split(","):
        token = token.strip()
        try:
            out.append(float(token))
        except ValueError:
            raise CLIError(f"bad exponent list {text!r}: token {token!r} is not a number")
    if not out:
        raise CLIError("empty exponent list")
    return tuple(out)


def _parse_widths(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise CLIError(f"bad widths list {text!r}")


def _parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise CLIError(f"bad range {text!r}: expected LO..HI")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise CLIError(f"bad range {text!r}")


def _load_config_file(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise MissingDataError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for raw in p.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CLIError(f"config line without '=': {raw!r}")
        out[key.strip()] = value.strip()
    return out


def _resolve(args, name: str, cast, default):
    """Flag value if given, else config-file value, else default."""
    flag = getattr(args, name.replace("-", "_"), None)
    if flag is not None:
        return flag
    cfg = getattr(args, "_file_config", {})
    if name in cfg:
        raw = cfg[name]
        try:
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except (ValueError, CLIError) as exc:
            raise CLIError(f"config value {name} = {raw!r}: {exc}")
    return default


def _file_flag(args, name: str) -> bool:
    """Boolean from the config file (store_true flags can only be enabled there)."""
    raw = getattr(args, "_file_config", {}).get(name, "")
    return raw.lower() in ("1", "true", "yes", "on")


def _write_json_summary(path: str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_spectrum(
    est: SpectrumEstimate, args, *, slopes=(), r2=(), fit_range=(1, 100), elapsed_ms=0, extra=None
) -> None:
    out = getattr(args, "out", None)
    if out:
        write_spectrum_csv(est, out)
        print(f"wrote {len(est.eigenvalues)} eigenvalues to {out}")
        if getattr(args, "normalized_out", None):
            normalized = SpectrumEstimate(
                eigenvalues=spectral.normalize_top(est.eigenvalues),
                dims=est.dims,
                samples=est.samples,
                activation=est.activation,
                seed=est.seed,
                meta=dict(est.meta),
            )
            write_spectrum_csv(normalized, args.normalized_out)
            print(f"wrote normalized spectrum to {args.normalized_out}")
        summary = RunSummary(
            config={**{k: str(v) for k, v in (extra or {}).items()}, **dict(est.meta)},
            seed=est.seed,
            slopes=tuple(slopes),
            r2=tuple(r2),
            fit_range=fit_range,
            elapsed_ms=elapsed_ms,
            version=__version__,
        )
        write_run_summary(summary, str(out) + ".summary")
    if getattr(args, "json_summary", None):
        _write_json_summary(
            args.json_summary,
            {
                "dims": list(est.dims),
                "samples": est.samples,
                "activation": est.activation,
                "seed": est.seed,
                "slopes": list(slopes),
                "r2": list(r2),
                "fit_range": list(fit_range),
                "eigenvalue_count": int(est.eigenvalues.size),
                "meta": dict(est.meta),
            },
        )


# --------------------------------------------------------------------------
# lattice


def cmd_lattice(args) -> int:
    exps = _parse_exponents(_resolve(args, "pi", str, "1,1"))
    X = _resolve(args, "X", float, None)
    if X is None:
        raise CLIError("--X is required")
    ordered = args.ordered or _file_flag(args, "ordered")
    bound_v = _resolve(args, "bound_v", int, None)
    lines = []
    if args.lattice_cmd == "count":
        res = (
            lattice.count_ordered(X, exps, bound_v=bound_v)
            if ordered
            else lattice.count_unordered(X, exps)
        )
        lines.append(f"count = {res.count}")
        if args.with_asym:
            asym = _asym_value(X, exps, ordered)
            lines.append(f"asymptotic = {asym!r}")
            lines.append(f"ratio = {res.count / asym!r}")
    else:  # asym
        asym = _asym_value(X, exps, ordered)
        lines.append(f"asymptotic = {asym!r}")
        if args.with_exact:
            res = (
                lattice.count_ordered(X, exps, bound_v=bound_v)
                if ordered
                else lattice.count_unordered(X, exps)
            )
            lines.append(f"count = {res.count}")
            lines.append(f"ratio = {res.count / asym!r}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    if args.json_summary:
        payload = {}
        for ln in lines:
            k, _, v = ln.partition(" = ")
            payload[k] = v
        _write_json_summary(args.json_summary, payload)
    return EXIT_OK


def _asym_value(X: float, exps: tuple[float, ...], ordered: bool) -> float:
    if not ordered:
        return lattice.asymptotic_unordered(X, exps)
    first = exps[0]
    if any(a != first for a in exps):
        raise CLIError(
            "ordered asymptotics require equal exponents (unequal exponents "
            "admit only an upper-bound shape; see ordered_shape)"
        )
    return lattice.asymptotic_ordered_equal(X, first, len(exps))


# --------------------------------------------------------------------------
# spectrum


def cmd_spectrum(args) -> int:
    t0 = time.monotonic()
    seed = _resolve(args, "seed", int, 0)
    alpha = _resolve(args, "alpha", float, 1.31)
    threads = 1 if args.deterministic else max(1, _resolve(args, "threads", int, 1))

    if args.spectrum_cmd == "hpi":
        exps = _parse_exponents(_resolve(args, "pi", str, "1,1"))
        parts = tuple(int(a) for a in exps)
        if any(p != a for p, a in zip(parts, exps)):
            raise CLIError("--pi must be positive integers for the tuple spectrum")
        v = _resolve(args, "v", int, 5000)
        k = _resolve(args, "k", int, 1000)
        H = population.PowerLawSpectrum(alpha, v)
        top = population.hpi_top_k(H, parts, k)
        est = SpectrumEstimate(
            eigenvalues=top.values(),
            dims=(v, len(parts)),
            samples=0,
            activation=f"tuple-product{list(parts)}",
            seed=seed,
            meta={"alpha": repr(alpha), "truncated": str(top.truncated).lower()},
        )
        _emit_spectrum(est, args, elapsed_ms=int(1000 * (time.monotonic() - t0)))
        print(f"top value = {top[0].value!r} at indices {top[0].indices}")
        return EXIT_OK

    if args.spectrum_cmd == "theory":
        p = _resolve(args, "p", int, 2)
        j_lo, j_hi = _parse_range(_resolve(args, "j", str, "1..1000"))
        curve = population.theory_curve(p, alpha)
        scale = _resolve(args, "C", float, curve.scale)
        eps = population.predicted_spectrum(curve, scale, range(j_lo, j_hi + 1))
        est = SpectrumEstimate(
            eigenvalues=eps,
            dims=(j_lo, j_hi),
            samples=0,
            activation=f"theory:p={p}",
            seed=seed,
            meta={"alpha": repr(alpha), "C": repr(scale), "b_theory": repr(curve.b_theory)},
        )
        _emit_spectrum(est, args, elapsed_ms=int(1000 * (time.monotonic() - t0)))
        print(f"N(u) inverted over j={j_lo}..{j_hi}; b_theory = {curve.b_theory!r}")
        return EXIT_OK

    # mc / exact need dimensions and an activation; collect every config
    # problem before exiting so one fix-up pass suffices
    problems: list[str] = []
    v = _resolve(args, "v", int, 1000)
    d = _resolve(args, "d", int, v)
    m = _resolve(args, "m", int, 20000)
    if v < 1:
        problems.append(f"v must be >= 1, got {v}")
    if d < 1 or d > v:
        problems.append(f"need 1 <= d <= v, got d={d}, v={v}")
    if not alpha > 1.0:
        problems.append(f"alpha must exceed 1, got {alpha}")
    if args.spectrum_cmd == "mc" and m < 100:
        problems.append(f"m must be >= 100, got {m}")
    act_text = _resolve(args, "act", str, None)
    p = _resolve(args, "p", int, None)
    act = None
    if act_text is None:
        try:
            act = simulate.Activation("monomial", p if p is not None else 1)
        except ValueError as exc:
            problems.append(str(exc))
    elif p is not None:
        problems.append("give either --p or --act, not both")
    else:
        try:
            act = simulate.Activation.parse(act_text)
        except ValueError as exc:
            problems.append(str(exc))
    if args.spectrum_cmd == "exact":
        if act is not None and act.kind != "monomial":
            problems.append("the exact population route supports monomial activations")
        if p is not None and p > 6:
            problems.append(f"exact route supports p <= 6, got {p}")
    fit_lo, fit_hi = _parse_range(_resolve(args, "fit", str, "5..100"))
    if not 1 <= fit_lo <= fit_hi:
        problems.append(f"bad fit range {fit_lo}..{fit_hi}")
    if problems:
        raise CLIError("invalid configuration:\n  " + "\n  ".join(problems))

    if args.spectrum_cmd == "exact":
        H = population.PowerLawSpectrum(alpha, v)
        W = simulate.sample_sketch(v, d, seed)
        K = simulate.exact_population_covariance(W, H, act.param)
        eig = spectral.sym_eigenvalues(K)
        est = SpectrumEstimate(
            eigenvalues=eig,
            dims=(v, d),
            samples=0,
            activation=act.label,
            seed=seed,
            meta={"alpha": repr(alpha), "route": "exact"},
        )
    else:  # mc
        dist = _parse_distribution(_resolve(args, "dist", str, "gaussian"), args)
        cfg = simulate.RFConfig(
            v=v,
            d=d,
            m=m,
            alpha=alpha,
            activation=act,
            distribution=dist,
            seed=seed,
            centered=bool(args.centered) or _file_flag(args, "centered"),
        )
        est = simulate.mc_covariance(cfg, threads=threads)

    fit_hi = min(fit_hi, est.eigenvalues.size)
    fit = spectral.slope_fit(est.eigenvalues, fit_lo, fit_hi)
    elapsed = int(1000 * (time.monotonic() - t0))
    _emit_spectrum(
        est,
        args,
        slopes=(fit.slope,),
        r2=(fit.r_squared,),
        fit_range=(fit_lo, fit_hi),
        elapsed_ms=elapsed,
        extra={"v": v, "d": d},
    )
    print(f"slope = {fit.slope:.6f}  r2 = {fit.r_squared:.6f}  (j = {fit_lo}..{fit_hi})")
    return EXIT_OK


def _parse_distribution(text: str, args) -> simulate.DataDistribution:
    kind, _, param = text.partition(":")
    kind = kind.strip()
    if kind == "student_t":
        return simulate.DataDistribution("student_t", df=float(param) if param else 5.0)
    if kind == "cifar10":
        batches = selfcheck.find_cifar_batches(getattr(args, "data", None))
        if not batches:
            raise MissingDataError(
                "cifar10 distribution requested but no binary batches found; "
                "point --data (or PLRF_CIFAR10_DIR) at cifar-10-batches-bin/"
            )
        ds = read_cifar10(batches)
        return simulate.DataDistribution("external", matrix=ds.values)
    try:
        return simulate.DataDistribution(kind)
    except ValueError as exc:
        raise CLIError(str(exc))


# --------------------------------------------------------------------------
# layers


def cmd_layers(args) -> int:
    t0 = time.monotonic()
    seed = _resolve(args, "seed", int, 0)
    alpha = _resolve(args, "alpha", float, 1.31)
    widths = _parse_widths(_resolve(args, "widths", str, "1024,1024,1024,1024"))
    act = simulate.Activation.parse(_resolve(args, "act", str, "tanh"))
    norm = _resolve(args, "norm", str, "none")
    fit_lo, fit_hi = _parse_range(_resolve(args, "fit", str, "1..100"))
    n = _resolve(args, "n", int, 4096)
    source = _resolve(args, "data", str, "synthetic")

    if source == "synthetic":
        v = _resolve(args, "v", int, 1024)
        H = population.PowerLawSpectrum(alpha, v)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(97,))))
        X = rng.standard_normal((n, v)) * np.sqrt(H.eigenvalues)
        tag = f"synthetic (alpha={alpha:g}, v={v})"
    else:
        base = Path(source)
        if not base.is_dir():
            raise MissingDataError(
                f"dataset directory not found: {source} "
                "(download the CIFAR-10 binary version and unpack cifar-10-batches-bin/)"
            )
        batches = selfcheck.find_cifar_batches(base)
        if not batches:
            raise MissingDataError(f"no *.bin batches under {source}")
        X = read_cifar10(batches, limit=n).values
        tag = f"cifar10 ({X.shape[0]} rows)"

    layers = [simulate.LayerSpec(w, act, norm) for w in widths]
    results = simulate.propagate_layers(X, layers, seed=seed, fit_range=(fit_lo, fit_hi))

    print(f"data: {tag}")
    print(f"{'layer':>5} {'dim':>6} {'slope':>9} {'r2':>7}  norm={norm}")
    slopes, r2s = [], []
    for t, (est, fit) in enumerate(results, start=1):
        print(f"{t:>5} {est.dims[1]:>6} {fit.slope:>9.4f} {fit.r_squared:>7.4f}")
        slopes.append(fit.slope)
        r2s.append(fit.r_squared)
        if args.out_dir:
            out_dir = Path(args.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            write_spectrum_csv(est, out_dir / f"layer_{t}.csv")
    elapsed = int(1000 * (time.monotonic() - t0))
    if args.out_dir:
        summary = RunSummary(
            config={
                "data": source,
                "widths": ",".join(str(w) for w in widths),
                "act": act.label,
                "norm": norm,
            },
            seed=seed,
            slopes=tuple(slopes),
            r2=tuple(r2s),
            fit_range=(fit_lo, fit_hi),
            elapsed_ms=elapsed,
            version=__version__,
        )
        write_run_summary(summary, Path(args.out_dir) / "layers.summary")
    if args.json_summary:
        _write_json_summary(
            args.json_summary,
            {"data": source, "slopes": slopes, "r2": r2s, "widths": list(widths), "seed": seed},
        )
    return EXIT_OK


# --------------------------------------------------------------------------
# selftest


def cmd_selftest(args) -> int:
    results = selfcheck.run_all(quick=args.quick, data_dir=getattr(args, "data", None))
    failed = 0
    for res in results:
        if res.passed is None:
            status = "SKIP"
        elif res.passed:
            status = "PASS"
        else:
            status = "FAIL"
            failed += 1
        print(f"{status}  criterion {res.criterion}: {res.detail}")
    if args.json_summary:
        _write_json_summary(
            args.json_summary,
            {
                "results": [
                    {"criterion": r.criterion, "passed": r.passed, "detail": r.detail}
                    for r in results
                ]
            },
        )
    print(f"{len(results) - failed}/{len(results)} criteria passed"
          + (" (quick mode)" if args.quick else ""))
    return EXIT_OK if failed == 0 else EXIT_INTERNAL


# --------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    parser.add_argument("--out", default=None, help="write primary output to this path")
    parser.add_argument("--json-summary", default=None, help="write a JSON run summary here")
    parser.add_argument(
        "--deterministic",
        action="store_true",
        help="force sequential accumulation (single worker)",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap worker threads (default 1)")
    parser.add_argument("--config", default=None, help="flat key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plrf",
        description="Power-law random features: lattice counts, spectra, layer sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"plrf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    lat = sub.add_parser("lattice", help="exact and asymptotic lattice-point counts")
    lat_sub = lat.add_subparsers(dest="lattice_cmd", required=True)
    for name, help_text in (("count", "exact count"), ("asym", "leading-order asymptotic")):
        p = lat_sub.add_parser(name, help=help_text)
        p.add_argument("--X", type=float, default=None, help="product bound (required)")
        p.add_argument("--pi", type=str, default=None, help="comma-separated exponents (default 1,1)")
        p.add_argument("--ordered", action="store_true", help="strictly increasing tuples")
        p.add_argument("--bound-v", type=int, default=None, help="cap coordinates at v")
        if name == "count":
            p.add_argument("--with-asym", action="store_true", help="also print asymptotic+ratio")
        else:
            p.add_argument("--with-exact", action="store_true", help="also print count+ratio")
        _add_common(p)
        p.set_defaults(func=cmd_lattice)

    spec = sub.add_parser("spectrum", help="eigenvalue spectra: mc, exact, hpi, theory")
    spec_sub = spec.add_subparsers(dest="spectrum_cmd", required=True)
    for name, help_text in (
        ("mc", "Monte Carlo feature covariance"),
        ("exact", "exact population covariance (monomials)"),
        ("hpi", "top-k tuple-product population spectrum"),
        ("theory", "counting-curve prediction"),
    ):
        p = spec_sub.add_parser(name, help=help_text)
        p.add_argument("--v", type=int, default=None, help="ambient dimension")
        p.add_argument("--d", type=int, default=None, help="sketch dimension (default v)")
        p.add_argument("--m", type=int, default=None, help="Monte Carlo samples (default 20000)")
        p.add_argument("--alpha", type=float, default=None, help="spectral exponent (default 1.31)")
        p.add_argument("--p", type=int, default=None, help="monomial degree")
        p.add_argument("--act", type=str, default=None, help="activation, e.g. tanh, monomial:2")
        p.add_argument("--dist", type=str, default=None,
                       help="gaussian | rademacher | student_t:NU | cifar10 (default gaussian)")
        p.add_argument("--data", type=str, default=None, help="dataset dir for --dist cifar10")
        p.add_argument("--pi", type=str, default=None, help="composition for hpi, e.g. 1,1")
        p.add_argument("--k", type=int, default=None, help="top-k size for hpi (default 1000)")
        p.add_argument("--j", type=str, default=None, help="index range for theory, e.g. 1..1000")
        p.add_argument("--C", type=float, default=None, help="theory scale constant")
        p.add_argument("--fit", type=str, default=None, help="slope fit range (default 5..100)")
        p.add_argument("--centered", action="store_true", help="subtract the feature mean")
        p.add_argument("--normalized-out", default=None, help="also write top-normalized CSV")
        _add_common(p)
        p.set_defaults(func=cmd_spectrum)

    lay = sub.add_parser("layers", help="propagate data through random layers")
    lay.add_argument("--data", type=str, default=None, help="'synthetic' or a CIFAR-10 dir")
    lay.add_argument("--widths", type=str, default=None, help="e.g. 1024,1024,1024,1024")
    lay.add_argument("--act", type=str, default=None, help="activation (default tanh)")
    lay.add_argument("--norm", type=str, default=None, help="none | rmsnorm | layernorm")
    lay.add_argument("--n", type=int, default=None, help="sample count (default 4096)")
    lay.add_argument("--v", type=int, default=None, help="synthetic input dimension")
    lay.add_argument("--alpha", type=float, default=None, help="synthetic spectral exponent")
    lay.add_argument("--fit", type=str, default=None, help="slope fit range (default 1..100)")
    lay.add_argument("--out-dir", default=None, help="write per-layer CSVs and a summary here")
    _add_common(lay)
    lay.set_defaults(func=cmd_layers)

    st = sub.add_parser("selftest", help="run the acceptance battery")
    st.add_argument("--quick", action="store_true", help="reduced scale, finishes in seconds")
    st.add_argument("--data", type=str, default=None, help="CIFAR-10 dir for criterion 11")
    _add_common(st)
    st.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            args._file_config = _load_config_file(args.config)
        else:
            args._file_config = {}
        return args.func(args)
    except (CLIError, BudgetExceededError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MissingDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_DATA
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
