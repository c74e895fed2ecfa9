"""Command-line interface for ontosem."""

import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from rich.console import Console
from rich.table import Table

from ontosem.corpus import CorpusError, run_corpus
from ontosem.engine import EngineError, UnificationError
from ontosem.expansion import CopulaError, ExpansionError
from ontosem.fragment import FragmentError
from ontosem.logic import LogicError, serialize
from ontosem.ontology import ROOT, Failure, OntologyError, ancestors, parse_type_term, unify
from ontosem.pipeline import Session
from ontosem.salience import SalienceError, lpap_star, lraps_star, msr
from ontosem.utils import get_config_value, get_data_dir, load_config, setup_logging

logger = logging.getLogger(__name__)

app = typer.Typer(help="ontosem: ontology-driven compositional semantics")

console = Console(stderr=True)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNIFICATION = 2

TRACE_LEVELS = ("final", "steps")

# YAML key path for each config field
CONFIG_KEYS = {
    "hierarchy_path": "paths.hierarchy",
    "lexicon_path": "paths.lexicon",
    "defs_path": "paths.definitions",
    "trace_verbosity": "trace.verbosity",
    "enumerate_readings": "trace.enumerate_readings",
    "ascii": "trace.ascii",
    "log_level": "logging.level",
    "log_file": "logging.file",
}


@dataclass
class SessionConfig:
    """Data file locations and output settings for one CLI invocation."""

    hierarchy_path: str = str(get_data_dir() / "ontology.txt")
    lexicon_path: str = str(get_data_dir() / "lexicon.txt")
    defs_path: str = str(get_data_dir() / "definitions.txt")
    trace_verbosity: str = "final"
    enumerate_readings: bool = False
    ascii: bool = False
    log_level: str = "WARNING"
    log_file: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert SessionConfig to dictionary."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SessionConfig":
        """Create SessionConfig from dictionary, ignoring unknown keys."""
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known and v is not None})

    @classmethod
    def resolve(cls, flags: Dict[str, Any], config_path: Optional[str] = None) -> "SessionConfig":
        """
        Merge settings: command-line flags win over the YAML config file, which wins
        over the built-in defaults.

        Args:
            flags: Values given on the command line (None means not given)
            config_path: Explicit config file; otherwise ``ONTOSEM_CONFIG`` is used

        Returns:
            The validated SessionConfig
        """
        settings = cls().to_dict()
        config = load_config(config_path)
        for name, key_path in CONFIG_KEYS.items():
            value = get_config_value(config, key_path)
            if value is not None:
                settings[name] = value
        settings.update({k: v for k, v in flags.items() if v is not None})
        cfg = cls.from_dict(settings)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.trace_verbosity not in TRACE_LEVELS:
            raise typer.BadParameter(
                f"trace verbosity must be one of {', '.join(TRACE_LEVELS)}, got {self.trace_verbosity!r}"
            )
        for path in (self.hierarchy_path, self.lexicon_path, self.defs_path):
            if not Path(path).is_file():
                raise typer.BadParameter(f"Data file not found: {path}")


HierarchyOption = typer.Option(None, "--hierarchy", help="Type hierarchy file")
LexiconOption = typer.Option(None, "--lexicon", help="Lexicon file")
DefsOption = typer.Option(None, "--defs", help="Concept definition file")
ConfigOption = typer.Option(None, "--config", "-c", help="YAML config file (default: $ONTOSEM_CONFIG)")
AsciiOption = typer.Option(None, "--ascii/--unicode", help="Render logical forms in the ASCII DSL")
LogLevelOption = typer.Option(None, "--log-level", help="Logging level (DEBUG, INFO, WARNING, ...)")


def _configure(config: Optional[str], **flags: Any) -> SessionConfig:
    try:
        cfg = SessionConfig.resolve(flags, config)
    except typer.BadParameter as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=EXIT_ERROR)
    setup_logging(cfg.log_file, getattr(logging, str(cfg.log_level).upper(), logging.WARNING))
    return cfg


def _load_session(cfg: SessionConfig) -> Session:
    try:
        return Session.load(cfg.hierarchy_path, cfg.lexicon_path, cfg.defs_path)
    except (OntologyError, SalienceError, FragmentError, ExpansionError) as e:
        console.print(f"[bold red]Error loading data files:[/bold red] {e}")
        logger.error(f"Error loading data files: {e}")
        raise typer.Exit(code=EXIT_ERROR)


@app.command()
def interpret(
    inputs: List[str] = typer.Argument(..., help="Sentence, LF text, or discourse sentences"),
    discourse: bool = typer.Option(False, "--discourse", "-d", help="Treat the inputs as one discourse"),
    lf: bool = typer.Option(False, "--lf", help="Inputs are logical forms in the LF DSL"),
    expanded: bool = typer.Option(False, "--expand", "-e", help="Expand condensed predicates"),
    trace: Optional[str] = typer.Option(None, "--trace", "-t", help="Trace verbosity: final or steps"),
    enumerate_readings: Optional[bool] = typer.Option(
        None, "--enumerate-readings/--no-enumerate-readings", help="List the separate readings"
    ),
    ascii: Optional[bool] = AsciiOption,
    hierarchy: Optional[str] = HierarchyOption,
    lexicon: Optional[str] = LexiconOption,
    defs: Optional[str] = DefsOption,
    config: Optional[str] = ConfigOption,
    log_level: Optional[str] = LogLevelOption,
):
    """Interpret a sentence, a discourse or a logical form and print its derivation."""
    cfg = _configure(
        config,
        hierarchy_path=hierarchy,
        lexicon_path=lexicon,
        defs_path=defs,
        trace_verbosity=trace,
        enumerate_readings=enumerate_readings,
        ascii=ascii,
        log_level=log_level,
    )
    if len(inputs) > 1 and not discourse:
        console.print("[bold red]Error:[/bold red] several inputs need --discourse")
        raise typer.Exit(code=EXIT_ERROR)
    session = _load_session(cfg)

    try:
        if lf:
            if len(inputs) > 1:
                console.print("[bold red]Error:[/bold red] --lf takes a single formula")
                raise typer.Exit(code=EXIT_ERROR)
            result = session.interpret_lf(inputs[0], expanded, cfg.enumerate_readings)
        else:
            text = inputs if discourse else inputs[0]
            result = session.interpret_text(text, expanded, cfg.enumerate_readings)
    except (UnificationError, CopulaError) as e:
        console.print(f"[bold red]Unification failed:[/bold red] {e}")
        logger.error(f"Unification failed: {e}")
        raise typer.Exit(code=EXIT_UNIFICATION)
    except (FragmentError, LogicError, EngineError, ExpansionError, OntologyError) as e:
        console.print(f"[bold red]Error interpreting input:[/bold red] {e}")
        logger.error(f"Error interpreting input: {e}")
        raise typer.Exit(code=EXIT_ERROR)

    typer.echo(result.trace.render(ascii=cfg.ascii, verbosity=cfg.trace_verbosity))
    for i, reading in enumerate(result.readings, start=1):
        typer.echo(f"reading {i}: {serialize(reading, cfg.ascii)}")


@app.command("unify")
def unify_command(
    left: str = typer.Argument(..., help="Left type term, e.g. dog^a"),
    right: str = typer.Argument(..., help="Right type term, e.g. entity"),
    hierarchy: Optional[str] = HierarchyOption,
    lexicon: Optional[str] = LexiconOption,
    defs: Optional[str] = DefsOption,
    config: Optional[str] = ConfigOption,
    log_level: Optional[str] = LogLevelOption,
):
    """Unify two type terms and print Single, Bridged or Failure."""
    cfg = _configure(
        config, hierarchy_path=hierarchy, lexicon_path=lexicon, defs_path=defs, log_level=log_level
    )
    session = _load_session(cfg)
    try:
        outcome = unify(
            session.hierarchy, session.registry, parse_type_term(left), parse_type_term(right)
        )
    except OntologyError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=EXIT_ERROR)

    if isinstance(outcome, Failure):
        typer.echo(f"{outcome} (types meet at {outcome.meet})")
        raise typer.Exit(code=EXIT_UNIFICATION)
    typer.echo(str(outcome))


@app.command("msr")
def msr_command(
    subject: str = typer.Argument(..., help="Subject type term, e.g. human:1"),
    obj: str = typer.Argument(..., help="Object type term, e.g. car:1"),
    hierarchy: Optional[str] = HierarchyOption,
    lexicon: Optional[str] = LexiconOption,
    defs: Optional[str] = DefsOption,
    config: Optional[str] = ConfigOption,
    log_level: Optional[str] = LogLevelOption,
):
    """Print the most salient relation between two types, or ⊥."""
    cfg = _configure(
        config, hierarchy_path=hierarchy, lexicon_path=lexicon, defs_path=defs, log_level=log_level
    )
    session = _load_session(cfg)
    try:
        relation = msr(
            session.registry, session.hierarchy, parse_type_term(subject), parse_type_term(obj)
        )
    except OntologyError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=EXIT_ERROR)

    if relation is None:
        typer.echo("⊥")
        raise typer.Exit(code=EXIT_UNIFICATION)
    typer.echo(relation)


@app.command()
def salience(
    type_name: str = typer.Argument(..., help="Type whose salience lists to show"),
    subject: Optional[str] = typer.Option(
        None, "--subject", "-s", help="Show relations from this subject type instead of properties"
    ),
    hierarchy: Optional[str] = HierarchyOption,
    lexicon: Optional[str] = LexiconOption,
    defs: Optional[str] = DefsOption,
    config: Optional[str] = ConfigOption,
    log_level: Optional[str] = LogLevelOption,
):
    """Show lpap* of a type, or lraps* from a subject type to it."""
    cfg = _configure(
        config, hierarchy_path=hierarchy, lexicon_path=lexicon, defs_path=defs, log_level=log_level
    )
    session = _load_session(cfg)
    h, reg = session.hierarchy, session.registry
    try:
        chain = [t for t in [h.require(type_name)] + ancestors(h, type_name) if t != ROOT]
        if subject is None:
            rows = [", ".join(props) for props in lpap_star(reg, h, type_name)]
            title = f"Properties applicable to {type_name}"
        else:
            rows = [
                ", ".join(str(sig) for sig in entries)
                for entries in lraps_star(reg, h, subject, type_name)
            ]
            title = f"Relations from {subject} to {type_name}"
    except OntologyError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=EXIT_ERROR)

    table = Table(title=title)
    table.add_column("Level", style="cyan")
    table.add_column("Type", style="green")
    table.add_column("Entries (most salient first)", style="yellow")
    for depth, (level_type, row) in enumerate(zip(chain, rows)):
        table.add_row(str(depth), level_type, row or "-")
    Console().print(table)


@app.command()
def corpus(
    corpus_path: Optional[str] = typer.Argument(None, help="Corpus file (default: shipped corpus)"),
    golden_dir: Optional[str] = typer.Option(None, "--golden", "-g", help="Golden file directory"),
    hierarchy: Optional[str] = HierarchyOption,
    lexicon: Optional[str] = LexiconOption,
    defs: Optional[str] = DefsOption,
    config: Optional[str] = ConfigOption,
    log_level: Optional[str] = LogLevelOption,
):
    """Run the golden corpus and report pass/fail per case."""
    cfg = _configure(
        config, hierarchy_path=hierarchy, lexicon_path=lexicon, defs_path=defs, log_level=log_level
    )
    session = _load_session(cfg)
    path = Path(corpus_path) if corpus_path else get_data_dir() / "corpus" / "worked_examples.txt"
    try:
        results = run_corpus(session, path, golden_dir)
    except CorpusError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=EXIT_ERROR)

    table = Table(title=f"Corpus: {path.name} ({len(results)} cases)")
    table.add_column("Case", style="cyan")
    table.add_column("Input", style="green")
    table.add_column("Result")
    for result in results:
        status = "[green]pass[/green]" if result.passed else "[bold red]FAIL[/bold red]"
        table.add_row(str(result.case.index), " / ".join(result.case.sentences), status)
    Console().print(table)

    failures = [r for r in results if not r.passed]
    for result in failures:
        typer.echo(f"case {result.case.index}: {result.error or 'mismatch'}")
        if result.diff:
            typer.echo(result.diff)
    typer.echo(f"{len(results) - len(failures)}/{len(results)} passed")
    if failures:
        raise typer.Exit(code=EXIT_ERROR)


if __name__ == "__main__":
    app()
