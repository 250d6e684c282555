"""
The `wfsos` command.

    wfsos check --spec demos/pepa_demo.wfs
    wfsos derive --spec demos/shop.pepa --emit dot --out shop.dot
    wfsos bisim --spec demos/pepa_demo.wfs --pair "(a,1).nil+(a,1).nil|(a,2).nil"
    wfsos congruence --spec demos/segala_demo.wfs --trials 200 --seed 0
    wfsos translate --spec demos/wgsos_demo.wfs
    wfsos export --in system.json --emit text

Roots are separated by `;` and may be written in term syntax (`prefix{a,1}(nil)`)
or, failing that, in PEPA syntax (`(a, 1).nil`). Without `--spec`, roots get the
PEPA semantics over the labels they mention.

Exit codes: 0 success, 1 property violated or not bisimilar, 2 usage or spec error,
3 budget exhausted. Errors are one line `error: <kind>: <message>` on stderr.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence, Tuple

import click

from wfsosWB._constants import (
    DEFAULT_MAX_DEPTH,
    DEFAULT_MAX_STATES,
    DEFAULT_SAMPLE_DEPTH,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    TAU,
)
from wfsosWB._types import Emit, OnExhaustion, SpecFormat
from wfsosWB.congruence import congruence_suite
from wfsosWB.construct import term_sampler
from wfsosWB.dsl import detect_format, dump_spec, load_spec, parse_term
from wfsosWB.engine import DerivationBudget, Deriver
from wfsosWB.equiv import coarsest_bisimulation
from wfsosWB.frontends.pepa import (
    PROCESS_OPS,
    PepaModel,
    parse_pepa,
    parse_pepa_process,
    pepa_sampler,
    pepa_variants,
    pepa_wfsos,
    used_labels,
)
from wfsosWB.syntax import Term, term_vars
from wfsosWB.ultras import Ultras
from wfsosWB.utils import BudgetExhaustedError, FormatViolationError, SpecError, WorkbenchError
from wfsosWB.wfsos import WfsosSpec, validate_spec

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_ERROR = 2
EXIT_BUDGET = 3

_PAIR_SEP = re.compile(r"(?<!\|)\|(?!\|)")


def log(text: str, symbol: Optional[str] = None, *, fg: Optional[str] = None, bold: bool = False) -> None:
    if symbol is not None:
        text = "[{: >1}] ".format(symbol) + text
    click.secho(text, fg=fg, bold=bold, err=True)


def _verbose() -> bool:
    ctx = click.get_current_context(silent=True)
    return bool(ctx is not None and ctx.find_root().params.get("verbose"))


def log_info(text: str) -> None:
    if _verbose():
        log(text, "*", fg="blue")


def log_success(text: str) -> None:
    if _verbose():
        log(text, "+", fg="green")


def log_warn(text: str) -> None:
    log(text, "!", fg="magenta")


def log_error(kind: str, message: Any) -> None:
    log(f"error: {kind}: {' '.join(str(message).split())}", fg="red", bold=True)


@dataclass
class Loaded:
    spec: WfsosSpec
    # resolves constants in PEPA-syntax roots
    model: PepaModel
    pepa: bool = False


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        log_info(f"wrote {out}")


def _parse_root(text: str, loaded: Optional[Loaded]) -> Term:
    ops = PROCESS_OPS if loaded is None else loaded.spec.sigma.names | set(loaded.spec.constants)
    try:
        t = parse_term(text, ops)
    except SpecError:
        t = parse_pepa_process(text, None if loaded is None else loaded.model)
    if term_vars(t):
        names = sorted(str(v) for v in term_vars(t))
        raise SpecError(f"Root '{text}' is not ground: unknown names {names}.")
    return t


def _split_roots(text: str) -> List[str]:
    return [part.strip() for part in text.split(";") if part.strip()]


def _load(spec_path: Optional[str], fmt: Optional[str], roots: Sequence[str] = ()) -> Loaded:
    if spec_path is None:
        terms = [_parse_root(r, None) for r in roots]
        labels = set().union(*(used_labels(t) for t in terms)) if terms else set()
        model = PepaModel(labels=tuple(sorted(labels | {TAU})))
        log_info(f"no spec given: PEPA semantics over labels {list(model.labels)}")
        return Loaded(pepa_wfsos(model), model, pepa=True)
    text = _read(spec_path)
    wanted = SpecFormat.validate(fmt) if fmt is not None else detect_format(spec_path)
    if wanted is SpecFormat.Pepa:
        model = parse_pepa(text)
        return Loaded(pepa_wfsos(model), model, pepa=True)
    spec = load_spec(text, wanted, Path(spec_path).stem)
    return Loaded(spec, PepaModel(dict(spec.constants), tuple(spec.labels)))


def _roots(loaded: Loaded, roots: Optional[str]) -> List[Term]:
    terms = [_parse_root(r, loaded) for r in _split_roots(roots or "")]
    if not terms:
        terms = loaded.model.roots()
    if not terms:
        raise click.UsageError("No roots: pass --roots or declare constants in the spec.")
    return terms


def _render(u: Ultras, emit: str) -> str:
    kind = Emit.validate(emit)
    if kind is Emit.Json:
        return u.to_json_str()
    if kind is Emit.Dot:
        return u.to_dot()
    return u.to_text()


def _budget(max_states: int, max_depth: int, on_exhaustion: str) -> DerivationBudget:
    return DerivationBudget(max_states, max_depth, OnExhaustion.validate(on_exhaustion))


def spec_options(f: Callable) -> Callable:
    f = click.option(
        "--format",
        "fmt",
        type=click.Choice([s.value for s in SpecFormat]),
        default=None,
        help="Input format; by default `.pepa` files are PEPA and others declare it.",
    )(f)
    return click.option(
        "--spec", "spec_path", type=click.Path(dir_okay=False), default=None, help="Spec file."
    )(f)


def budget_options(f: Callable) -> Callable:
    f = click.option(
        "--on-exhaustion",
        type=click.Choice([o.value for o in OnExhaustion]),
        default=OnExhaustion.Error.value,
        show_default=True,
    )(f)
    f = click.option("--max-depth", type=int, default=DEFAULT_MAX_DEPTH, show_default=True)(f)
    return click.option("--max-states", type=int, default=DEFAULT_MAX_STATES, show_default=True)(f)


def out_option(f: Callable) -> Callable:
    return click.option(
        "--out", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout."
    )(f)


def emit_option(f: Callable) -> Callable:
    return click.option(
        "--emit", type=click.Choice([e.value for e in Emit]), default=Emit.Json.value, show_default=True
    )(f)


class WorkbenchGroup(click.Group):
    """Runs a subcommand and turns its result or error into the exit code."""

    def main(self, *args: Any, **kwargs: Any) -> Any:  # type: ignore[override]
        kwargs["standalone_mode"] = False
        try:
            rv = super().main(*args, **kwargs)
        except click.ClickException as e:
            log_error("usage", e.format_message())
            sys.exit(EXIT_ERROR)
        except click.exceptions.Abort:
            log_error("usage", "aborted")
            sys.exit(EXIT_ERROR)
        except BudgetExhaustedError as e:
            log_error(e.kind, e)
            sys.exit(EXIT_BUDGET)
        except WorkbenchError as e:
            log_error(e.kind, e)
            sys.exit(EXIT_ERROR)
        except OSError as e:
            log_error("io", e)
            sys.exit(EXIT_ERROR)
        except ValueError as e:
            log_error("usage", e)
            sys.exit(EXIT_ERROR)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


@click.group(cls=WorkbenchGroup)
@click.option("-v", "--verbose", is_flag=True, help="Report progress on stderr.")
def cli(verbose: bool) -> None:
    """Derive, compare and check weighted transition systems given by WFSOS rules."""


@cli.command()
@spec_options
def check(spec_path: Optional[str], fmt: Optional[str]) -> int:
    """Validate a spec and print its format violations."""
    if spec_path is None:
        raise click.UsageError("check needs --spec.")
    try:
        loaded = _load(spec_path, fmt)
    except FormatViolationError as e:
        violations: List[Any] = e.violations
    else:
        violations = validate_spec(loaded.spec)
    for v in violations:
        click.echo(str(v))
    if violations:
        log_warn(f"{len(violations)} violation(s)")
        return EXIT_VIOLATED
    click.echo(f"ok: {loaded.spec.name}: {len(loaded.spec.rules)} rules, 0 violations")
    return EXIT_OK


@cli.command()
@spec_options
@click.option("--roots", default=None, help='Root terms separated by ";".')
@budget_options
@emit_option
@out_option
def derive(
    spec_path: Optional[str],
    fmt: Optional[str],
    roots: Optional[str],
    max_states: int,
    max_depth: int,
    on_exhaustion: str,
    emit: str,
    out: Optional[str],
) -> int:
    """Explore the system reachable from the roots."""
    loaded = _load(spec_path, fmt, _split_roots(roots or ""))
    terms = _roots(loaded, roots)
    u = Deriver(loaded.spec, _budget(max_states, max_depth, on_exhaustion)).explore(terms)
    if u.truncated:
        log_warn(f"exploration truncated at {len(u)} states")
    log_success(f"{len(u)} states")
    _write(_render(u, emit), out)
    return EXIT_OK


def _split_pair(pair: str) -> Tuple[str, str]:
    parts = [p.strip() for p in _PAIR_SEP.split(pair)]
    if len(parts) != 2 or not all(parts):
        raise click.UsageError(f"--pair expects two terms separated by a single '|', got {pair!r}.")
    return parts[0], parts[1]


@cli.command()
@spec_options
@click.option("--pair", required=True, help='Two terms as "p|q".')
@budget_options
@click.option("--partition", "show_partition", is_flag=True, help="Also print the coarsest bisimulation.")
@out_option
def bisim(
    spec_path: Optional[str],
    fmt: Optional[str],
    pair: str,
    max_states: int,
    max_depth: int,
    on_exhaustion: str,
    show_partition: bool,
    out: Optional[str],
) -> int:
    """Decide whether two terms are bisimilar in their joint explored system."""
    left, right = _split_pair(pair)
    loaded = _load(spec_path, fmt, [left, right])
    p, q = _parse_root(left, loaded), _parse_root(right, loaded)
    u = Deriver(loaded.spec, _budget(max_states, max_depth, on_exhaustion)).explore([p, q])
    if u.truncated:
        raise BudgetExhaustedError(f"exploration truncated at {len(u)} states; bisimilarity undecided")
    part = coarsest_bisimulation(u)
    same = part.same(p, q)
    lines = ["bisimilar" if same else "not bisimilar"]
    if show_partition:
        lines.append(json.dumps(part.to_json(), ensure_ascii=False))
    _write("\n".join(lines) + "\n", out)
    return EXIT_OK if same else EXIT_VIOLATED


@cli.command()
@spec_options
@click.option("--trials", type=int, default=DEFAULT_TRIALS, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--depth", type=int, default=DEFAULT_SAMPLE_DEPTH, show_default=True, help="Sampled term depth.")
@budget_options
@click.option("--table", type=click.Path(dir_okay=False), default=None, help="Write the per-trial CSV here.")
@out_option
def congruence(
    spec_path: Optional[str],
    fmt: Optional[str],
    trials: int,
    seed: int,
    jobs: int,
    depth: int,
    max_states: int,
    max_depth: int,
    on_exhaustion: str,
    table: Optional[str],
    out: Optional[str],
) -> int:
    """Check randomly that bisimilarity survives every operator context."""
    if spec_path is None:
        raise click.UsageError("congruence needs --spec.")
    loaded = _load(spec_path, fmt)
    spec = loaded.spec
    if loaded.pepa:
        sampler = pepa_sampler(loaded.model.actions, depth, sorted(loaded.model.constants))
        variants = pepa_variants
    else:
        labels = [a for a in spec.labels if a != TAU]
        sampler = term_sampler(spec.sigma, labels, depth, leaves=sorted(spec.constants))
        variants = None
    report = congruence_suite(
        spec,
        sampler,
        trials=trials,
        seed=seed,
        variants=variants,
        budget=_budget(max_states, max_depth, on_exhaustion),
        depth=depth,
        jobs=jobs,
        show_progress=_verbose(),
    )
    if table is not None:
        report.table.to_csv(table, index=False)
    lines = [
        f"trials: {trials}, nontrivial: {report.nontrivial}, skipped: {report.skipped}, "
        f"counterexamples: {len(report.counterexamples)}"
    ]
    lines.extend(f"counterexample: {cex}" for cex in report.counterexamples)
    _write("\n".join(lines) + "\n", out)
    return EXIT_OK if report.ok else EXIT_VIOLATED


@cli.command()
@spec_options
@out_option
def translate(spec_path: Optional[str], fmt: Optional[str], out: Optional[str]) -> int:
    """Print the WFSOS spec of a PEPA, Segala or W-GSOS input."""
    if spec_path is None:
        raise click.UsageError("translate needs --spec.")
    _write(dump_spec(_load(spec_path, fmt).spec), out)
    return EXIT_OK


@cli.command()
@click.option("--in", "in_path", type=click.Path(dir_okay=False), required=True, help="ULTraS JSON.")
@emit_option
@out_option
def export(in_path: str, emit: str, out: Optional[str]) -> int:
    """Re-emit a stored system (as written by `derive`) in another format."""
    u = Ultras.from_json(json.loads(_read(in_path)))
    _write(_render(u, emit), out)
    return EXIT_OK


def main() -> None:
    cli(prog_name="wfsos")
