"""Command line entry point: parameters, generation, fooling experiments and diagnostics.

Every command writes one JSON report (``ReportEnvelope``) to stdout or ``--out``.
Exit codes: 0 when all verdicts pass, 1 when a verdict fails, 2 on
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ValidationError

from . import __version__
from . import schemas
from .config import Settings, get_settings
from .schemas import ErrorBody, FamilyModel, MollifierPointModel, MollifierReport, ReportEnvelope, RunConfig
from .services.errors import GaussPrgError, ParameterError
from .services.harness import (
    anti_concentration_test,
    coupling_test,
    exhaustive_independence_test,
    fooling_gap,
)
from .services.lemmas import lemma_suite
from .services.logging import RunContext, run_log_store
from .services.mollifier import MollifierConfig, mollifier_factors
from .services.prg import derive_params, expand_seed, generate, seed_length
from .services.ptf import (
    PtfFunction,
    constant_family,
    control_family,
    family_digest,
    family_from_model,
    family_to_model,
    random_family,
)

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

COUPLING_DELTA = 2.0**-7

SETTINGS_FLAGS = ("const_c", "const_c_prime", "const_c_double_prime", "bias_margin", "polylog_exponent")
# option values that never influence a report
_UNREPORTED = {"handler", "config", "pretty", "out", "milestones"}


class ConfigError(GaussPrgError):
    """Raised for unusable command line or config-file input."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that remembers every option destination it defines."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        # argparse registers -h from its own __init__
        self.flag_actions: Dict[str, argparse.Action] = {}
        self.list_dests: set[str] = set()
        self.switch_dests: set[str] = set()
        super().__init__(*args, **kwargs)

    @property
    def dests(self) -> List[str]:
        return list(self.flag_actions)

    def add_argument(self, *args: Any, **kwargs: Any) -> argparse.Action:
        action = super().add_argument(*args, **kwargs)
        if kwargs.get("action") in ("help", "version"):
            return action
        self.flag_actions[action.dest] = action
        if kwargs.get("action") == "append" or kwargs.get("nargs") in ("+", "*"):
            self.list_dests.add(action.dest)
        elif kwargs.get("action") in ("store_true", "store_false"):
            self.switch_dests.add(action.dest)
        return action

    def config_default(self, dest: str, value: Any) -> Any:
        """Convert a config-file value the way the matching flag would be converted."""

        action = self.flag_actions[dest]
        if value is None:
            return None
        if dest in self.switch_dests:
            if not isinstance(value, bool):
                raise ConfigError(f"config key {dest} must be true or false")
            return value
        if dest in self.list_dests:
            if not isinstance(value, list) or not value:
                raise ConfigError(f"config key {dest} must be a non-empty list")
            return [self._convert(action, item) for item in value]
        return self._convert(action, value)

    @staticmethod
    def _convert(action: argparse.Action, value: Any) -> Any:
        if isinstance(value, (bool, list, dict)):
            raise ConfigError(f"config key {action.dest} has unusable value {value!r}")
        text = str(value)
        try:
            converted = action.type(text) if action.type else text
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config key {action.dest} has invalid value {value!r}") from exc
        if action.choices is not None and converted not in action.choices:
            raise ConfigError(f"config key {action.dest} must be one of {sorted(action.choices)}")
        return converted


def _common(parser: _Parser) -> None:
    parser.add_argument("--out", default=None, help="Write the report here instead of stdout.")
    parser.add_argument("--pretty", action="store_true", help="Indent the JSON report.")
    parser.add_argument("--config", default=None, help="JSON file of option defaults; flags win.")
    parser.add_argument("--milestones", default=None, help="Write the run's logged milestones here as JSON.")


def _param_options(parser: _Parser) -> None:
    parser.add_argument("--k", type=int, default=None, help="Number of polynomials.")
    parser.add_argument("--d", type=int, default=None, help="Degree.")
    parser.add_argument("--eps", type=float, default=None, help="Target error in (0, 1).")
    parser.add_argument("--n", type=int, default=None, help="Dimension.")
    parser.add_argument("--override-R", type=int, default=None)
    parser.add_argument("--override-L", type=int, default=None)
    parser.add_argument("--override-M", type=int, default=None)
    parser.add_argument("--const-c", type=float, default=None, help="C in R = ceil(C log2(kd/eps)).")
    parser.add_argument("--const-c-prime", type=float, default=None)
    parser.add_argument("--const-c-double-prime", type=float, default=None)
    parser.add_argument("--bias-margin", type=int, default=None)
    parser.add_argument("--polylog-exponent", type=int, default=None)


def _family_options(parser: _Parser) -> None:
    parser.add_argument("--family", default=None, help="Family JSON file (polys + combiner_hex).")
    parser.add_argument(
        "--family-kind",
        choices=["random", "control", "zero", "one"],
        default="random",
        help="Built-in family when --family is not given.",
    )
    parser.add_argument("--family-seed", type=int, default=0)
    parser.add_argument("--control-width", type=float, default=0.1)
    parser.add_argument("--no-normalize", action="store_true", help="Keep random polynomials unnormalized.")


def build_parser() -> tuple[_Parser, Dict[str, _Parser]]:
    parser = _Parser(prog="gaussprg", description="Pseudorandom generator for functions of Gaussian PTFs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    leaves: Dict[str, _Parser] = {}

    params = commands.add_parser("params", help="Derive parameters and the exact seed length.")
    _param_options(params)
    params.set_defaults(handler=cmd_params)
    leaves["params"] = params

    gen = commands.add_parser("gen", help="Run the generator on one seed.")
    _param_options(gen)
    gen.add_argument("--seed-hex", default=None, help="Seed as hex; short seeds are stretched with SHAKE-256.")
    gen.add_argument("--raw-seed", action="store_true", help="Refuse to stretch a short seed.")
    gen.add_argument("--sidecar", default=None, help="Write the vector as little-endian float64 here.")
    gen.set_defaults(handler=cmd_gen)
    leaves["gen"] = gen

    fool = commands.add_parser("fool", help="Estimate the fooling gap of a family.")
    _param_options(fool)
    _family_options(fool)
    fool.add_argument("--N", type=int, default=20_000, help="Draws per arm.")
    fool.add_argument("--master-seed", default="00", help="Hex master seed of the per-draw schedule.")
    fool.add_argument("--target-eps", type=float, default=None)
    fool.add_argument("--sampler", choices=["prg", "under-independent"], default="prg")
    fool.set_defaults(handler=cmd_fool)
    leaves["fool"] = fool

    diag = commands.add_parser("diag", help="Diagnostic suites.")
    suites = diag.add_subparsers(dest="suite", required=True, parser_class=_Parser)

    independence = suites.add_parser("independence", help="Exhaustive joint uniformity of a small source.")
    independence.add_argument("--p", type=int, default=None)
    independence.add_argument("--t", type=int, default=None)
    independence.add_argument("--indices", type=int, nargs="+", default=None)
    independence.add_argument("--order", type=int, default=None, help="Largest subset size checked; defaults to t.")
    independence.set_defaults(handler=cmd_diag_independence)
    leaves["independence"] = independence

    coupling = suites.add_parser("coupling", help="Exact vs truncated Box-Muller closeness.")
    coupling.add_argument("--M", type=int, default=None)
    coupling.add_argument("--delta", type=float, default=COUPLING_DELTA, help="Closeness radius; defaults to 2^-7.")
    coupling.add_argument("--N", type=int, default=100_000)
    coupling.add_argument("--seed", type=int, default=0)
    coupling.set_defaults(handler=cmd_diag_coupling)
    leaves["coupling"] = coupling

    anticonc = suites.add_parser("anticonc", help="Small-ball probability of unit-norm polynomials.")
    anticonc.add_argument("--d", type=int, default=None)
    anticonc.add_argument("--eps", type=float, default=None)
    anticonc.add_argument("--N", type=int, default=100_000)
    anticonc.add_argument("--trials", type=int, default=20)
    anticonc.add_argument("--c", type=float, default=None)
    anticonc.add_argument("--n", type=int, default=2)
    anticonc.add_argument("--seed", type=int, default=0)
    anticonc.set_defaults(handler=cmd_diag_anticonc)
    leaves["anticonc"] = anticonc

    lemmas = suites.add_parser("lemmas", help="Run the analytic check suite.")
    lemmas.add_argument("--seed", type=int, default=0)
    lemmas.add_argument("--fault", type=float, default=0.0, help="Perturb expansion coefficients by this much.")
    lemmas.set_defaults(handler=cmd_diag_lemmas)
    leaves["lemmas"] = lemmas

    mollifier = suites.add_parser("mollifier", help="Mollifier factors and G at given points.")
    mollifier.add_argument("--eps", type=float, default=None)
    mollifier.add_argument("--k", type=int, default=1)
    mollifier.add_argument("--d", type=int, default=2)
    mollifier.add_argument("--n", type=int, default=None)
    _family_options(mollifier)
    mollifier.add_argument("--point", action="append", default=None, help="Comma-separated coordinates; repeatable.")
    mollifier.set_defaults(handler=cmd_diag_mollifier)
    leaves["mollifier"] = mollifier

    schema = commands.add_parser("schema", help="Print the JSON schema of a report model.")
    schema.add_argument("--model", default="ReportEnvelope")
    schema.set_defaults(handler=cmd_schema)
    leaves["schema"] = schema

    for leaf in leaves.values():
        _common(leaf)
    return parser, leaves


def _load_config(argv: Sequence[str]) -> Dict[str, Any]:
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        payload = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {known.config}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config file must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in payload.items()}


def _require(args: argparse.Namespace, parser: _Parser, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name) is None]
    if missing:
        parser.error(f"the following arguments are required: {', '.join(missing)}")


def _settings_for(args: argparse.Namespace) -> Settings:
    base = get_settings()
    updates = {name: getattr(args, name) for name in SETTINGS_FLAGS if getattr(args, name, None) is not None}
    if not updates:
        return base
    return Settings.model_validate({**base.model_dump(), **updates})


def _reported_settings(settings: Settings) -> Dict[str, Any]:
    # threads never changes a result, so reports stay identical across thread counts
    return settings.model_dump(exclude={"threads"})


def _params_for(args: argparse.Namespace, settings: Settings, context: RunContext):
    overrides = {
        key: value
        for key, value in (("R", args.override_R), ("L", args.override_L), ("M", args.override_M))
        if value is not None
    }
    return derive_params(args.k, args.d, args.eps, args.n, overrides, settings=settings, context=context)


def _hex(text: str, flag: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise ParameterError(f"{flag} is not valid hex: {text!r}") from exc


def _family_for(args: argparse.Namespace, n: int | None) -> PtfFunction:
    if args.family:
        try:
            family = family_from_model(FamilyModel.model_validate_json(Path(args.family).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read family file {args.family}: {exc}") from exc
    elif n is None:
        raise ConfigError("--n is required unless --family is given")
    elif args.family_kind == "control":
        family = control_family(n, args.control_width)
    elif args.family_kind in ("zero", "one"):
        family = constant_family(n, 1 if args.family_kind == "one" else 0)
    else:
        family = random_family(args.family_seed, n, args.d, args.k, normalize=not args.no_normalize)
    if n is not None and family.dimension != n:
        raise ConfigError(f"family dimension {family.dimension} does not match --n {n}")
    return family


def _parse_point(text: str) -> List[float]:
    try:
        return [float(value) for value in text.split(",")]
    except ValueError as exc:
        raise ParameterError(f"cannot parse point {text!r}") from exc


Outcome = Tuple[Union[BaseModel, Dict[str, Any]], Optional[str], Optional[str]]


def cmd_params(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    _require(args, parser, "k", "d", "eps", "n")
    params = _params_for(args, settings, context)
    bits = seed_length(params)
    return {"params": params.model_dump(mode="json"), "seed_length": bits, "seed_bytes": -(-bits // 8)}, None, None


def cmd_gen(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    _require(args, parser, "k", "d", "eps", "n", "seed_hex")
    params = _params_for(args, settings, context)
    seed = expand_seed(_hex(args.seed_hex, "--seed-hex"), seed_length(params), raw=args.raw_seed)
    output = generate(params, seed, sidecar_path=args.sidecar, settings=settings, context=context)
    return output, None, args.seed_hex


def cmd_fool(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    _require(args, parser, "k", "d", "eps", "n")
    params = _params_for(args, settings, context)
    family = _family_for(args, args.n)
    report = fooling_gap(
        family,
        params,
        args.N,
        _hex(args.master_seed, "--master-seed"),
        target_eps=args.target_eps,
        prg_sampler=args.sampler,
        settings=settings,
        context=context,
    )
    result = {"gap": report.model_dump(mode="json"), "family": family_to_model(family).model_dump(mode="json")}
    return result, report.verdict, args.master_seed


def cmd_diag_independence(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    _require(args, parser, "p", "t")
    indices = args.indices if args.indices is not None else list(range(min(args.p, 8)))
    report = exhaustive_independence_test(args.p, args.t, indices, args.order, settings=settings, context=context)
    return report, report.verdict, None


def cmd_diag_coupling(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    _require(args, parser, "M")
    report = coupling_test(args.M, args.delta, args.N, args.seed, settings=settings, context=context)
    return report, report.verdict, None


def cmd_diag_anticonc(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    _require(args, parser, "d", "eps")
    report = anti_concentration_test(
        args.d,
        args.eps,
        args.N,
        args.trials,
        args.c,
        seed=args.seed,
        n=args.n,
        settings=settings,
        context=context,
    )
    return report, report.verdict, None


def cmd_diag_lemmas(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    report = lemma_suite(args.seed, expansion_fault=args.fault, settings=settings, context=context)
    return report, report.verdict, None


def cmd_diag_mollifier(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    _require(args, parser, "eps", "point")
    family = _family_for(args, args.n)
    cfg = MollifierConfig(eps=args.eps, family=family)
    points = []
    for text in args.point:
        x = _parse_point(text)
        factors = mollifier_factors(cfg, x)
        points.append(MollifierPointModel(x=x, factors=factors, g=math.prod(f.value for f in factors)))
    return MollifierReport(eps=args.eps, family_digest=family_digest(family), points=points), None, None


def cmd_schema(args: argparse.Namespace, parser: _Parser, settings: Settings, context: RunContext) -> Outcome:
    model = getattr(schemas, args.model, None)
    if not (isinstance(model, type) and issubclass(model, BaseModel)):
        raise ConfigError(f"unknown schema model: {args.model}")
    return model.model_json_schema(), None, None


def _dump(payload: Dict[str, Any], pretty: bool) -> str:
    if pretty:
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config_error(context: RunContext, exc: Exception) -> int:
    context.warning(logger, "configuration rejected", event="cli.config_error", error=type(exc).__name__)
    body = ErrorBody(error=type(exc).__name__, detail=str(exc), exit_code=EXIT_CONFIG)
    sys.stderr.write(_dump(body.model_dump(mode="json"), pretty=False))
    return EXIT_CONFIG


def _execute(argv: List[str], context: RunContext) -> Tuple[int, Optional[str]]:
    parser, leaves = build_parser()
    try:
        config_values = _load_config(argv)
        known_dests = {dest for leaf in leaves.values() for dest in leaf.dests}
        unknown = sorted(set(config_values) - known_dests)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        for leaf in leaves.values():
            leaf.set_defaults(
                **{key: leaf.config_default(key, value) for key, value in config_values.items() if key in leaf.dests}
            )
    except ConfigError as exc:
        return _config_error(context, exc), None

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_PASS if exc.code in (0, None) else EXIT_CONFIG), None

    leaf_name = args.suite if args.command == "diag" else args.command
    leaf = leaves[leaf_name]
    handler: Callable[..., Outcome] = args.handler
    context.with_command(f"diag {leaf_name}" if args.command == "diag" else args.command)
    context.info(logger, "command started", event="cli.command")

    try:
        settings = _settings_for(args)
        result, verdict, master_seed = handler(args, leaf, settings, context)
    except SystemExit as exc:
        return (EXIT_PASS if exc.code in (0, None) else EXIT_CONFIG), args.milestones
    except (GaussPrgError, ValidationError) as exc:
        return _config_error(context, exc), args.milestones

    if args.command == "schema":
        _write(_dump(result, args.pretty), args.out)
        return EXIT_PASS, args.milestones

    options = {key: value for key, value in sorted(vars(args).items()) if key not in _UNREPORTED}
    options["settings"] = _reported_settings(settings)
    envelope = ReportEnvelope(
        tool_version=__version__,
        config=RunConfig(command=args.command, options=options, master_seed=master_seed, out_path=args.out),
        master_seed=master_seed,
        verdict=verdict,
        result=result.model_dump(mode="json") if isinstance(result, BaseModel) else result,
    )
    _write(_dump(envelope.model_dump(mode="json"), args.pretty), args.out)
    context.info(logger, "command finished", event="cli.verdict", verdict=verdict or "none")
    return (EXIT_FAIL if verdict == "fail" else EXIT_PASS), args.milestones


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    context = RunContext()
    try:
        code, milestones_path = _execute(argv, context)
    finally:
        milestones = run_log_store.pop(context.run_id)
    if milestones_path:
        # timestamps and run ids live here, never in the report
        Path(milestones_path).write_text(json.dumps(milestones, sort_keys=True, indent=2, default=str) + "\n")
    return code


__all__ = ["EXIT_CONFIG", "EXIT_FAIL", "EXIT_PASS", "build_parser", "main"]
