"""Command-line front door.

Each command resolves its descriptor files, validates them against the JSON
schemas shipped in ``vml/schemas``, computes a payload and caches it under
``$VML_CACHE_DIR`` (default ``~/.cache/vml``) keyed by the SHA-256 of the
resolved configuration, seed and package version.  Payloads are canonical
JSON (or CSV), so a cache hit and a fresh run produce the same bytes.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 module error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, checks, kernels, mutations
from .charfun import char_functional
from .errors import ConfigError, VMLError
from .free_measure import circle_function_from_config, freeness_demo, rows_to_csv
from .kernel_qi import DensityModel, cameron_martin_norm, hellinger_dichotomy, quasi_invariance_check, standard_tests
from .linfun import cauchy_in_measure_oracle, coeffs_from_config, coordinate, three_series_test
from .measure import CircleMeasure, ProductMeasure, measure_from_config, sample_batch
from .spectral import (
    SpectralModel,
    auto_index_sets,
    build_spectral_model,
    chi_from_config,
    homomorphism_unitarity_check,
    realize_in_Rinfty,
    reconstruct_chi,
)

COMMANDS = ("sample", "linfun-test", "charfun-eval", "kernel-check", "free-demo", "spectral-build", "spectral-verify", "realize", "verify")
TWO_WORD = {("linfun", "test"), ("charfun", "eval"), ("kernel", "check"), ("free", "demo"), ("spectral", "build"), ("spectral", "verify")}


# ---------------------------------------------------------------------------
# schemas and descriptors


def _schema(name: str) -> dict:
    return json.loads(resources.files("vml").joinpath("schemas", f"{name}.json").read_text())


def validate(doc, schema_name: str, where: str = ""):
    """Raise :class:`ConfigError` with a JSON pointer to the failing field."""
    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        pointer = where + "".join(f"/{p}" for p in err.absolute_path)
        raise ConfigError(f"{schema_name}: {err.message}", pointer or where or "/")
    return doc


def load_descriptor(path: str | None, schema_name: str, flag: str):
    if path is None:
        raise ConfigError(f"{flag} is required", flag)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", flag) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc.msg}", flag) from None
    return doc


def _validated(opts: dict, key: str, schema_name: str):
    if key not in opts:
        raise ConfigError(f"--{key} is required", f"--{key}")
    doc = opts[key]
    if isinstance(doc, list) and schema_name == "coeffs":
        for i, item in enumerate(doc):
            validate(item, schema_name, f"--{key}#/{i}")
        return doc
    return validate(doc, schema_name, f"--{key}#")


def _build(opts: dict, key: str, schema_name: str, builder):
    """Validate ``opts[key]`` and construct it, pointing parse errors at the flag."""
    doc = _validated(opts, key, schema_name)
    try:
        return builder(doc)
    except ConfigError as exc:
        if not exc.pointer.startswith("--"):
            exc.pointer = f"--{key}#{exc.pointer}"
        raise


# ---------------------------------------------------------------------------
# payload encoding


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    return obj


def encode_json(payload) -> bytes:
    return (json.dumps(_clean(payload), sort_keys=True, indent=1) + "\n").encode()


def encode_csv(rows: list[dict]) -> bytes:
    return rows_to_csv([_clean(r) for r in rows]).encode()


def _table(fmt: str, payload, rows):
    if fmt == "csv":
        if rows is None:
            raise ConfigError("this command has no tabular output", "--format")
        return encode_csv(rows)
    return encode_json(payload)


# ---------------------------------------------------------------------------
# commands


def _parse_ints(text, flag):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated integers", flag) from None


def _parse_grid(text):
    vals = dict(kv.split("=", 1) for kv in str(text).split(",") if "=" in kv)
    try:
        return float(vals.get("L", 12)), int(vals.get("M", 1024))
    except ValueError:
        raise ConfigError("--grid expects L=<float>,M=<int>", "--grid") from None


def _parse_cylinders(text):
    text = str(text)
    if text.startswith("auto:"):
        return auto_index_sets(_parse_ints(text[5:], "--cylinders")[0])
    return [tuple(_parse_ints(part, "--cylinders")) for part in text.split(";")]


def _cmd_sample(o, seed):
    m = _build(o, "measure", "measure", measure_from_config)
    trunc = int(o.get("truncation", 16))
    count = int(o.get("mc") or 8)
    x = sample_batch(m, trunc, count, seed)
    vals = x.values
    if isinstance(m, CircleMeasure):
        z = x.complex_values()
        payload = {"indices": x.indices, "re": z.real, "im": z.imag, "lambda": m.lambdas(x.streams, seed)}
        rows = [{**{f"re_{i}": v.real for i, v in zip(x.indices, r)}, **{f"im_{i}": v.imag for i, v in zip(x.indices, r)}} for r in z]
    else:
        payload = {"indices": x.indices, "values": vals}
        rows = [{f"x_{i}": v for i, v in zip(x.indices, r)} for r in vals]
    payload.update(seed=seed, streams=x.streams)
    return payload, rows


def _cmd_linfun(o, seed):
    m = _build(o, "measure", "measure", measure_from_config)
    f = _build(o, "coeffs", "coeffs", coeffs_from_config)
    if not isinstance(m, ProductMeasure):
        raise ConfigError("linfun-test needs a product measure", "--measure#/kind")
    rep = three_series_test(f, m)
    grid = _parse_ints(o.get("checkpoints") or "16,32,64,128,256,512,1024", "--checkpoints")
    rep.cauchy = cauchy_in_measure_oracle(f, m, float(o.get("eps", 0.05)), grid, int(o.get("mc") or 10_000), seed)
    return rep.to_dict(), [c.to_dict() for c in rep.cauchy]


def _cmd_charfun(o, seed):
    m = _build(o, "measure", "measure", measure_from_config)
    f = _build(o, "coeffs", "coeffs", coeffs_from_config)
    method = o.get("method") or "auto"
    if method == "auto":
        closed = isinstance(m, CircleMeasure) or m.has_closed_form_cf
        method = "closed_form" if closed and not o.get("mc") else "monte_carlo"
    est = char_functional(m, f, int(o.get("truncation", 64)), method, int(o.get("mc") or 10_000), seed)
    return est.to_dict(), None


def _cmd_kernel(o, seed):
    m = _build(o, "measure", "measure", measure_from_config)
    h = _build(o, "shift", "coeffs", coeffs_from_config)
    cm = cameron_martin_norm(h, m)
    hel = hellinger_dichotomy(h, m)
    qi = []
    if cm.membership == "member":
        model = DensityModel(h, m, int(o.get("truncation", 64)))
        qi = [quasi_invariance_check(model, g, int(o.get("mc") or 100_000), seed, name=k).to_dict() for k, g in standard_tests().items()]
    hel_rows = [{"N": N, "product": p} for N, p in zip(hel.grid, hel.products)]
    payload = {"norm_sq": cm.norm_sq, "membership": cm.membership, "cm": cm.to_dict(), "hellinger": hel_rows, "hellinger_limit": hel.to_dict(), "qi_tests": qi}
    return payload, hel_rows


def _cmd_free(o, seed):
    fns = validate(o.get("functions") or ["square_wave"], "functions", "--functions#")
    family = [circle_function_from_config(c) for c in fns]
    windows = _parse_ints(o.get("windows") or "8,32,128", "--windows")
    rows = freeness_demo(family, windows, int(o.get("mc") or 20_000), seed)
    return {"rows": rows}, rows


def _cmd_spectral_build(o, seed):
    chi = _build(o, "chi", "chi", chi_from_config)
    model = build_spectral_model(
        chi,
        _parse_cylinders(o.get("cylinders") or "auto:4"),
        _parse_grid(o.get("grid") or "L=12,M=1024"),
        o.get("weights") or "1/n^2",
        mc=int(o.get("mc") or 4000),
        seed=seed,
    )
    return model.to_dict(), None


def _verify_model(model: SpectralModel, trials, mc, seed):
    rng = np.random.default_rng(seed)
    if model.sampleable:
        width = 4
    else:
        sets = [k for k in range(1, 4) if tuple(range(1, k + 1)) in model.cylinders]
        if not sets:
            raise VMLError("custom model has no cylinder of the form (1..k) to sample from")
        width = max(sets)
    rows = []
    for j in range(trials):
        g = rng.normal(size=int(rng.integers(1, width + 1)))
        if not model.sampleable:
            g = np.pad(g, (0, width - len(g)))
        est = reconstruct_chi(model, g, mc, seed + j)
        target = complex(model.chi(g))
        z = abs(est.value - target) / est.std_error if est.std_error else 0.0
        rows.append({"g": g, "re": est.value.real, "im": est.value.imag, "stderr": est.std_error, "chi_re": target.real, "chi_im": target.imag, "z": z})
    F = {"one": lambda h: np.ones(len(h)), "h1": coordinate(1)}
    hom = homomorphism_unitarity_check(model, rng.normal(size=width), rng.normal(size=width), F, min(mc, 20_000), seed) if model.sampleable else []
    return {
        "reconstruct": rows,
        "within_3se": sum(r["z"] <= 3 for r in rows),
        "trials": trials,
        "homomorphism": hom,
        "consistency": model.consistency_report,
    }, rows


def _cmd_spectral_verify(o, seed):
    trials, mc = int(o.get("trials", 30)), int(o.get("mc") or 100_000)
    if "model" in o:
        model = SpectralModel.from_dict(o["model"], chi_from_config(o["chi"]) if "chi" in o else None)
    else:
        chi = _build(o, "chi", "chi", chi_from_config)
        model = build_spectral_model(chi, _parse_cylinders(o.get("cylinders") or "auto:3"), _parse_grid(o.get("grid") or "L=12,M=1024"), o.get("weights") or "1/n^2", mc=2000, seed=seed)
    if np.isnan(model.chi(np.zeros(1))).any():
        raise ConfigError("a custom model needs its --chi descriptor to be verified", "--chi")
    return _verify_model(model, trials, mc, seed)


def _cmd_realize(o, seed):
    m = _build(o, "measure", "measure", measure_from_config)
    gens = _build(o, "coeffs", "coeffs", lambda d: [coeffs_from_config(c) for c in (d if isinstance(d, list) else [d])])
    r = realize_in_Rinfty(m, gens, int(o.get("mc") or 10_000), seed)
    Y = r.samples
    payload = {**r.to_dict(), "mean": Y.mean(axis=0), "covariance": np.atleast_2d(np.cov(Y, rowvar=False))}
    rows = [dict(zip(r.columns, row)) for row in Y]
    return payload, rows


HANDLERS = {
    "sample": _cmd_sample,
    "linfun-test": _cmd_linfun,
    "charfun-eval": _cmd_charfun,
    "kernel-check": _cmd_kernel,
    "free-demo": _cmd_free,
    "spectral-build": _cmd_spectral_build,
    "spectral-verify": _cmd_spectral_verify,
    "realize": _cmd_realize,
}


def compute(command: str, opts: dict, seed: int) -> bytes:
    """The payload bytes for a resolved configuration (no cache, no I/O)."""
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}", "command")
    fmt = opts.get("format") or "json"
    payload, rows = HANDLERS[command](opts, seed)
    return _table(fmt, payload, rows)


# ---------------------------------------------------------------------------
# cache


def cache_dir() -> Path:
    return Path(os.environ.get("VML_CACHE_DIR") or Path.home() / ".cache" / "vml")


def config_hash(command: str, opts: dict, seed: int) -> str:
    blob = json.dumps({"command": command, "opts": _clean(opts), "seed": seed, "version": __version__}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)  # mkstemp creates 0600
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def run(command: str, opts: dict, seed: int = 0, use_cache: bool = True) -> tuple[bytes, dict]:
    """Compute (or fetch) a payload and return it with its run record."""
    key = config_hash(command, opts, seed)
    started = _now()
    path = cache_dir() / f"{key}.out"
    if use_cache and path.exists():
        data, hit = path.read_bytes(), True
    else:
        data, hit = compute(command, opts, seed), False
        if use_cache:
            atomic_write(path, data)
    record = {
        "command": command,
        "config_hash": key,
        "seed": seed,
        "version": __version__,
        "backend": kernels.BACKEND,
        "started": started,
        "finished": _now(),
        "cached": hit,
        "payload_sha256": hashlib.sha256(data).hexdigest(),
    }
    if use_cache:
        atomic_write(cache_dir() / f"{key}.record.json", encode_json(record))
    return data, record


# ---------------------------------------------------------------------------
# argument parsing


def _normalize_argv(argv):
    argv = list(argv)
    if len(argv) >= 2 and (argv[0], argv[1]) in TWO_WORD:
        argv = [f"{argv[0]}-{argv[1]}"] + argv[2:]
    return argv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vml", description="Vector measure laboratory.")
    p.add_argument("--version", action="version", version=f"vml {__version__} ({kernels.BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, help_, *flags):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--mc", type=int)
        s.add_argument("--out")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--record", help="write the run record (hash, timestamps) here")
        s.add_argument("--no-cache", action="store_true")
        for f in flags:
            s.add_argument(f"--{f}")
        return s

    cmd("sample", "draw truncated samples", "measure", "truncation")
    cmd("linfun-test", "three-series verdict and Cauchy-in-measure oracle", "measure", "coeffs", "eps", "checkpoints")
    cmd("charfun-eval", "characteristic functional", "measure", "coeffs", "method", "truncation")
    cmd("kernel-check", "Cameron-Martin membership, Hellinger limit, quasi-invariance", "measure", "shift", "truncation")
    cmd("free-demo", "linearization of circle functions", "functions", "windows")
    cmd("spectral-build", "spectral model of a positive-definite functional", "chi", "cylinders", "grid", "weights")
    cmd("spectral-verify", "reconstruction and representation checks", "chi", "model", "cylinders", "grid", "weights", "trials")
    cmd("realize", "pushforward into R^infinity", "measure", "coeffs")
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="trivial")
    v.add_argument("--checks", help="comma-separated check names (overrides --suite)")
    v.add_argument("--inject", help="activate a mutation for the whole run")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.add_argument("--list", action="store_true")
    return p


_FILE_FLAGS = {"measure": "measure", "coeffs": "coeffs", "shift": "coeffs", "chi": "chi", "functions": "functions", "model": None}


def _resolve(args) -> dict:
    opts = {}
    for k, v in vars(args).items():
        if k in ("command", "seed", "out", "record", "no_cache") or v is None:
            continue
        if k in _FILE_FLAGS:
            opts[k] = load_descriptor(v, _FILE_FLAGS[k], f"--{k}")
        else:
            opts[k] = v
    return opts


def _emit(data: bytes, out: str | None):
    if out:
        atomic_write(Path(out), data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _fail(code: int, kind: str, message: str, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return code


def _verify(args) -> int:
    if args.list:
        for name, names in checks.SUITES.items():
            print(f"{name}: {', '.join(names)}")
        return 0
    if args.inject and args.inject not in mutations.KNOWN:
        return _fail(2, "config", f"unknown mutation {args.inject!r}", pointer="--inject")
    suite = args.checks.split(",") if args.checks else args.suite
    if isinstance(suite, str) and suite not in checks.SUITES:
        return _fail(2, "config", f"unknown suite {suite!r}", pointer="--suite")
    try:
        report = checks.verify_suite(suite, args.seed, args.inject)
    except KeyError as exc:
        return _fail(2, "config", f"unknown check {exc.args[0]}", pointer="--checks")
    for c in report["checks"]:
        sys.stderr.write(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']:<28} {c['summary']}\n")
    _emit(encode_json(report), args.out)
    return 0 if report["passed"] else 1


def main(argv=None) -> int:
    argv = _normalize_argv(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify(args)
    try:
        opts = _resolve(args)
        data, record = run(args.command, opts, args.seed, use_cache=not args.no_cache)
    except ConfigError as exc:
        return _fail(2, "config", str(exc.args[0]), pointer=exc.pointer)
    except (VMLError, ValueError, ArithmeticError) as exc:
        return _fail(3, "module", str(exc), type=type(exc).__name__)
    _emit(data, args.out)
    if args.record:
        atomic_write(Path(args.record), encode_json(record))
    return 0


if __name__ == "__main__":
    sys.exit(main())
