"""CLI tool to decide discreteness of a group generated by three parabolics."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import config
from algorithm import (
    AlgorithmConfig,
    Decision,
    Degenerate,
    Discrete,
    EllipticWitness,
    Undetermined,
    UndeterminedReason,
    Verdict,
    run_decision,
)
from canonical import (
    ElementaryConfigurationError,
    NonPositiveCoordinateError,
    Normalization,
    NotParabolicError,
    ParabolicTriple,
    normalize,
)
from ford import Interval, PingPongCertificate
from moebius import (
    INFINITY,
    FourPSError,
    InvalidMatrixError,
    Matrix2,
    ToleranceBandError,
    UnimodularMatrix,
    is_exact,
    scalar_to_str,
    to_scalar,
)
from oracle import WordLengthCapError, cross_validate
from render import emit_svg

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

EXIT_DISCRETE = 0
EXIT_WITNESS = 1
EXIT_UNDETERMINED = 2
EXIT_INPUT_ERROR = 64

OPTION_KEYS = ("epsilon", "delta", "max_iterations", "arithmetic", "tolerance")
_CONFIG_FILE_KEYS = {
    "EPSILON": "epsilon",
    "DELTA": "delta",
    "MAX_ITERATIONS": "max_iterations",
    "TOLERANCE": "tolerance",
}


class InputDocumentError(FourPSError):
    """The input document or command line is malformed."""


INPUT_ERRORS = (
    InputDocumentError,
    NonPositiveCoordinateError,
    NotParabolicError,
    ElementaryConfigurationError,
    InvalidMatrixError,
    WordLengthCapError,
)


@dataclass(frozen=True)
class DecisionRequest:
    cfg: AlgorithmConfig
    exact: bool
    triple: ParabolicTriple | None = None
    matrices: tuple[UnimodularMatrix, UnimodularMatrix, UnimodularMatrix] | None = None


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------

def parse_input_document(doc: object, defaults: dict | None = None, overrides: dict | None = None) -> DecisionRequest:
    """Validate an input document; ``overrides`` beat the document, which beats ``defaults``."""
    if not isinstance(doc, dict):
        raise InputDocumentError("input document must be a JSON object")
    settings = {**(defaults or {}), **{k: doc[k] for k in OPTION_KEYS if k in doc}, **(overrides or {})}
    arithmetic = settings.get("arithmetic", "exact")
    if arithmetic not in ("exact", "approx"):
        raise InputDocumentError(f"arithmetic must be 'exact' or 'approx', not {arithmetic!r}")
    exact = arithmetic == "exact"
    try:
        cfg = AlgorithmConfig(
            epsilon=to_scalar(settings.get("epsilon", config.EPSILON)),
            delta=to_scalar(settings.get("delta", config.DELTA)),
            max_iterations=int(settings.get("max_iterations", config.MAX_ITERATIONS)),
            tolerance=float(settings.get("tolerance", config.TOLERANCE)),
        )
    except (TypeError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise InputDocumentError(f"invalid option: {exc}") from exc

    if ("triple" in doc) == ("matrices" in doc):
        raise InputDocumentError("exactly one of 'triple' and 'matrices' is required")
    try:
        if "triple" in doc:
            values = doc["triple"]
            if not isinstance(values, list) or len(values) != 3:
                raise InputDocumentError("'triple' must be a list of three numbers")
            return DecisionRequest(cfg, exact, triple=ParabolicTriple.parse(*values, exact=exact))
        rows = doc["matrices"]
        if not isinstance(rows, list) or len(rows) != 3 or any(not isinstance(r, list) or len(r) != 4 for r in rows):
            raise InputDocumentError("'matrices' must be three lists [a, b, c, d]")
        matrices = tuple(UnimodularMatrix.of(*row, exact=exact) for row in rows)
        return DecisionRequest(cfg, exact, matrices=matrices)
    except (TypeError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise InputDocumentError(f"cannot read number: {exc}") from exc


def settings_from_file(path: str | Path) -> dict:
    if not Path(path).is_file():
        raise InputDocumentError(f"config file not found: {path}")
    raw = config.read_config_file(path)
    return {name: raw[key] for key, name in _CONFIG_FILE_KEYS.items() if key in raw}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _num(value):
    if value is INFINITY:
        return "inf"
    if is_exact(value):
        return scalar_to_str(value)
    if isinstance(value, float):
        return value
    return str(value)


def _matrix(M: Matrix2) -> list:
    return [_num(v) for v in M.entries]


def _interval(iv: Interval) -> list:
    return [_num(iv.lo), _num(iv.hi)]


def certificate_document(cert: PingPongCertificate) -> dict:
    return {
        "translation": _num(cert.translation),
        "translation_word": str(cert.translation_word),
        "strip": _interval(cert.strip) if cert.strip is not None else None,
        "conjugator": _matrix(cert.conjugator),
        "generators": [
            {
                "name": g.name,
                "word": str(g.word),
                "matrix": _matrix(g.matrix),
                "footprints": [_interval(iv) for iv in g.footprints],
            }
            for g in cert.generators
        ],
    }


def exit_status(verdict: Verdict) -> int:
    if isinstance(verdict, Discrete):
        return EXIT_DISCRETE
    if isinstance(verdict, (EllipticWitness, Degenerate)):
        return EXIT_WITNESS
    return EXIT_UNDETERMINED


def decision_document(
    decision: Decision,
    triple: ParabolicTriple,
    request: DecisionRequest,
    normalization: Normalization | None = None,
) -> dict:
    verdict = decision.verdict
    doc = {
        "verdict": verdict.tag,
        "certificate": None,
        "witness_word": None,
        "witness_trace": None,
        "normalized_triple": [_num(v) for v in (triple.x, triple.y, triple.z)],
        "iterations": decision.iterations,
        "config_used": {**request.cfg.as_dict(), "arithmetic": "exact" if request.exact else "approx"},
        "detail": "",
        "final_triple": [_num(v) for v in (decision.state.triple.x, decision.state.triple.y, decision.state.triple.z)],
        "trail": list(decision.state.trail),
        "construction": None,
        "normalization": None,
    }
    if isinstance(verdict, Discrete):
        doc["certificate"] = certificate_document(verdict.certificate)
        if verdict.construction is not None:
            c = verdict.construction
            doc["construction"] = {
                "p": _num(c.p),
                "c_of_p": _num(c.c_of_p),
                "mirror_point": _num(c.mirror_point),
                "b_image": _num(c.b_image),
                "domain": [[_num(g.start), _num(g.end)] for g in c.domain],
            }
    elif isinstance(verdict, EllipticWitness):
        doc["witness_word"] = str(verdict.word)
        doc["witness_trace"] = _num(verdict.trace)
    elif isinstance(verdict, Degenerate):
        doc["witness_word"] = str(verdict.word)
        doc["detail"] = verdict.detail
    elif isinstance(verdict, Undetermined):
        doc["detail"] = f"{verdict.reason.value}: {verdict.detail}"
    if normalization is not None:
        doc["normalization"] = {
            "order": list(normalization.order),
            "inverted": list(normalization.inverted),
            "conjugator": _matrix(normalization.conjugator),
        }
    return doc


def band_document(request: DecisionRequest, detail: str) -> dict:
    """Output for input matrices whose normal form could not be read off."""
    return {
        "verdict": "undetermined",
        "certificate": None,
        "witness_word": None,
        "witness_trace": None,
        "normalized_triple": None,
        "iterations": 0,
        "config_used": {**request.cfg.as_dict(), "arithmetic": "exact" if request.exact else "approx"},
        "detail": f"{UndeterminedReason.TOLERANCE_BAND.value}: {detail}",
    }


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def run_document(
    doc: object,
    defaults: dict | None = None,
    overrides: dict | None = None,
    svg_path: str | None = None,
    oracle_check: bool = False,
    max_word_len: int | None = None,
    workers: int = 1,
) -> tuple[dict, int]:
    """Decide one input document and return the output document with its exit status."""
    request = parse_input_document(doc, defaults, overrides)
    normalization = None
    if request.matrices is not None:
        try:
            normalization = normalize(request.matrices, pick="smallest_x", tolerance=request.cfg.tolerance)
        except ToleranceBandError as exc:
            logger.info("normalization reached the tolerance band: %s", exc)
            return band_document(request, str(exc)), EXIT_UNDETERMINED
        triple = normalization.triple
    else:
        triple = request.triple
    decision = run_decision(triple, request.cfg)
    output = decision_document(decision, triple, request, normalization)

    if oracle_check:
        if request.exact:
            consistency = cross_validate(
                triple,
                decision.verdict,
                request.cfg,
                max_length=max_word_len or config.ORACLE_WORD_LENGTH,
                workers=workers,
            )
            if not consistency.consistent:
                logger.error("oracle disagrees with %s: %s", decision.verdict.tag, consistency.detail)
            output["oracle"] = consistency.as_dict()
        else:
            logger.warning("oracle check needs exact arithmetic; skipped")
    if svg_path:
        emit_svg(decision, svg_path)
    return output, exit_status(decision.verdict)


def _batch_item(doc: object, defaults: dict, overrides: dict) -> tuple[dict, int]:
    try:
        return run_document(doc, defaults, overrides)
    except INPUT_ERRORS as exc:
        logger.warning("batch item rejected: %s", exc)
        return {"error": str(exc)}, EXIT_INPUT_ERROR
    except OverflowError as exc:
        logger.warning("batch item out of range: %s", exc)
        return {"error": f"number out of range: {exc}"}, EXIT_INPUT_ERROR
    except FourPSError as exc:
        logger.error("batch item failed: %s", exc)
        return {"error": str(exc)}, EXIT_UNDETERMINED


def run_batch(docs: object, defaults: dict, overrides: dict, workers: int) -> tuple[list, int]:
    if not isinstance(docs, list):
        raise InputDocumentError("batch file must hold a JSON array of input documents")
    job = partial(_batch_item, defaults=defaults, overrides=overrides)
    if workers > 1 and len(docs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, docs))
    else:
        results = [job(doc) for doc in docs]
    status = max((s for _, s in results), default=EXIT_DISCRETE)
    return [doc for doc, _ in results], status


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise InputDocumentError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="Decide whether three parabolics generate a free discrete group")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", metavar="FILE", help="JSON input document")
    source.add_argument("--triple", nargs=3, metavar=("X", "Y", "Z"), help="normalized triple, e.g. 1 1/4 1/4")
    source.add_argument("--matrices", nargs=12, metavar="N", help="three matrices as a b c d a b c d a b c d")
    source.add_argument("--batch", metavar="FILE", help="JSON array of input documents")
    parser.add_argument("--epsilon", help="Step S window (default: 1/10)")
    parser.add_argument("--delta", help="minimal positioning slack (default: 1/100)")
    parser.add_argument("--max-iters", type=int, help="loop budget (default: 10000)")
    parser.add_argument("--arith", choices=("exact", "approx"), help="arithmetic backend (default: exact)")
    parser.add_argument("--tolerance", help="comparison band for approx arithmetic (default: 1e-12)")
    parser.add_argument("--svg", metavar="PATH", help="write an SVG figure of the configuration")
    parser.add_argument("--oracle-check", action="store_true", help="cross-check the verdict by word enumeration")
    parser.add_argument("--max-word-len", type=int, help="oracle word length (default: 10)")
    parser.add_argument("--config", metavar="FILE", help="dotenv-format settings file")
    parser.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="log level for stderr")
    parser.add_argument("--workers", type=int, help="processes for --batch and the oracle")
    return parser


def _flag_overrides(args: argparse.Namespace) -> dict:
    flags = {
        "epsilon": args.epsilon,
        "delta": args.delta,
        "max_iterations": args.max_iters,
        "arithmetic": args.arith,
        "tolerance": args.tolerance,
    }
    return {k: v for k, v in flags.items() if v is not None}


def _read_json(path: str) -> object:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputDocumentError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputDocumentError(f"malformed JSON in {path}: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputDocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    logging.basicConfig(level=args.log_level or config.LOG_LEVEL, format=LOG_FORMAT, stream=sys.stderr)

    try:
        defaults = settings_from_file(args.config) if args.config else {}
        overrides = _flag_overrides(args)
        workers = args.workers or config.BATCH_WORKERS
        if args.batch:
            output, status = run_batch(_read_json(args.batch), defaults, overrides, workers)
        else:
            if args.input:
                doc = _read_json(args.input)
            elif args.triple:
                doc = {"triple": args.triple}
            else:
                m = args.matrices
                doc = {"matrices": [m[0:4], m[4:8], m[8:12]]}
            output, status = run_document(
                doc,
                defaults,
                overrides,
                svg_path=args.svg,
                oracle_check=args.oracle_check,
                max_word_len=args.max_word_len,
                workers=args.workers or 1,
            )
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OverflowError as exc:
        print(f"error: number out of range: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as exc:
        print(f"error: cannot write {args.svg}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    print(json.dumps(output, indent=2))
    return status


if __name__ == "__main__":
    sys.exit(main())
