"""Golden-corpus runner: interpret each case and diff it against its golden file."""

import difflib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from ontosem.engine import EngineError
from ontosem.expansion import ExpansionError
from ontosem.fragment import FragmentError
from ontosem.logic import LogicError, alpha_normalize, serialize
from ontosem.ontology import OntologyError
from ontosem.pipeline import Interpretation, Session
from ontosem.utils import read_text

logger = logging.getLogger(__name__)

GROUP_SEPARATOR = "---"
EXPAND_DIRECTIVE = "%expand"
TRACE_HEADER = "# trace: steps"


class CorpusError(Exception):
    """Exception raised for malformed corpus files."""
    pass


@dataclass
class CorpusCase:
    """One discourse group of the corpus, numbered from 0 in file order."""

    index: int
    sentences: List[str] = field(default_factory=list)
    expanded: bool = False
    line: int = 0


@dataclass
class CaseResult:
    case: CorpusCase
    passed: bool
    expected: Optional[str] = None
    actual: Optional[str] = None
    error: Optional[str] = None

    @property
    def diff(self) -> str:
        if self.expected is None or self.actual is None:
            return ""
        lines = difflib.unified_diff(
            self.expected.splitlines(),
            self.actual.splitlines(),
            fromfile=f"golden/{self.case.index}.lf",
            tofile="actual",
            lineterm="",
        )
        return "\n".join(lines)


def parse_corpus(text: str, source: str = "<text>") -> List[CorpusCase]:
    """
    Split corpus text into cases.

    One sentence per line; ``---`` closes a discourse group; a ``%expand`` line
    marks its group for expanded interpretation; ``#`` starts a comment.
    """
    cases: List[CorpusCase] = []
    current = CorpusCase(index=0)

    def close() -> None:
        nonlocal current
        if current.sentences:
            cases.append(current)
        elif current.expanded:
            raise CorpusError(f"{source}:{current.line}: '{EXPAND_DIRECTIVE}' on an empty group")
        current = CorpusCase(index=len(cases))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == GROUP_SEPARATOR:
            close()
            continue
        if not current.sentences and not current.expanded:
            current.line = lineno
        if line == EXPAND_DIRECTIVE:
            current.expanded = True
            continue
        if line.startswith("%"):
            raise CorpusError(f"{source}:{lineno}: unknown directive {line!r}")
        current.sentences.append(line)
    close()
    return cases


def load_corpus(path: Union[str, Path]) -> List[CorpusCase]:
    try:
        text = read_text(path)
    except OSError as e:
        raise CorpusError(f"Cannot read corpus {path}: {e}") from e
    return parse_corpus(text, source=str(path))


def render_actual(interpretation: Interpretation, steps: bool) -> str:
    if steps:
        return interpretation.trace.render(ascii=True, verbosity="steps", normalize=True)
    return serialize(alpha_normalize(interpretation.final), ascii=True)


def run_case(session: Session, case: CorpusCase, golden_dir: Path) -> CaseResult:
    """
    Interpret one case and compare it with ``golden_dir/<index>.lf``.

    A missing golden file or an interpretation error counts as a failure.
    """
    golden = golden_dir / f"{case.index}.lf"
    if not golden.exists():
        logger.warning(f"Missing golden file {golden}")
        return CaseResult(case, False, error=f"missing golden file {golden}")
    expected = golden.read_text(encoding="utf-8").strip()
    steps = expected.splitlines()[0].strip() == TRACE_HEADER if expected else False
    if steps:
        expected = "\n".join(expected.splitlines()[1:]).strip()

    try:
        text = case.sentences[0] if len(case.sentences) == 1 else case.sentences
        interpretation = session.interpret_text(text, expanded=case.expanded)
    except (FragmentError, EngineError, ExpansionError, LogicError, OntologyError) as e:
        logger.info(f"Case {case.index} failed to interpret: {e}")
        return CaseResult(case, False, expected=expected, error=str(e))

    actual = render_actual(interpretation, steps)
    return CaseResult(case, actual == expected, expected=expected, actual=actual)


def run_corpus(
    session: Session,
    corpus_path: Union[str, Path],
    golden_dir: Optional[Union[str, Path]] = None,
) -> List[CaseResult]:
    """
    Run every case of a corpus file.

    Args:
        session: Loaded session
        corpus_path: Corpus file
        golden_dir: Directory of golden files (default: ``golden/`` next to the corpus)

    Returns:
        One CaseResult per case, in corpus order
    """
    corpus_path = Path(corpus_path)
    golden_dir = Path(golden_dir) if golden_dir else corpus_path.parent / "golden"
    results = []
    for case in load_corpus(corpus_path):
        result = run_case(session, case, golden_dir)
        logger.info(f"Case {case.index}: {'pass' if result.passed else 'FAIL'}")
        results.append(result)
    return results
