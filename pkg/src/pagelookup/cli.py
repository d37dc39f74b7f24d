"""Command line interface: identify / decode / bench / gen-corpus / eval.

Machine output (JSON or the requested report format) goes to stdout; logs
go to stderr (set verbosity with the CLD_LOG environment variable). Exit
codes: 0 success, 1 usage error, 2 data/schema error, 3 invariant
violation (e.g. a losslessness breach).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bench import (
    BenchConfig,
    GenSpec,
    LosslessnessError,
    emit_report,
    generate_corpus,
    make_model,
    make_tokenizer,
    run_benchmark,
)
from .cti import HeuristicConfig, classify_gold, classify_heuristic, span_label_f1
from .docmodel import PageSchemaError, load_page
from .draft import DraftConfig
from .engine import DEFAULT_INSTRUCTION, assisted_decode, greedy_decode, session_for_page
from .metrics import score_pair
from .tokenizers import BOS

logger = logging.getLogger("pagelookup")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the taxonomy here reserves 2 for
    # data errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(payload) -> None:
    sys.stdout.write(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n")


def _add_draft_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-ngram", type=int, default=3)
    parser.add_argument("--min-ngram", type=int, default=1)
    parser.add_argument("--num-candidates", type=int, default=10)


def _draft_config(args) -> DraftConfig:
    return DraftConfig(
        max_ngram=args.max_ngram,
        min_ngram=args.min_ngram,
        num_candidates=args.num_candidates,
    )


def cmd_identify(args) -> int:
    page = load_page(args.input)
    heuristic_config = None
    if args.config:
        heuristic_config = HeuristicConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    if args.classifier == "gold":
        labeling = classify_gold(page)
    else:
        labeling = classify_heuristic(page, heuristic_config)
    payload = {
        "page_id": page.page_id,
        "labels": {str(span_id): label.value for span_id, label in sorted(labeling.items())},
        "f1": None,
    }
    if all(span.gold_label is not None for span in page.spans):
        payload["f1"] = span_label_f1(labeling, classify_gold(page)).as_dict()
    _emit(payload)
    return EXIT_OK


def cmd_decode(args) -> int:
    page = load_page(args.page)
    if page.reference_markdown is None:
        raise PageSchemaError(
            f"page {page.page_id} has no reference_markdown; the {args.model} oracle model needs one"
        )
    tokenizer = make_tokenizer(args.tokenizer, [page], DEFAULT_INSTRUCTION)
    prompt = [BOS] + tokenizer.encode(DEFAULT_INSTRUCTION)
    reference = tokenizer.encode(page.reference_markdown)
    model = make_model(args.model, reference, len(prompt), seed=args.seed, page_id=page.page_id)
    cap = args.max_new_tokens or len(reference) + 128
    if args.method == "scratch":
        output, stats = greedy_decode(model, prompt, cap)
    else:
        session = session_for_page(
            page,
            tokenizer=tokenizer,
            model=model,
            method=args.method,
            config=_draft_config(args),
            classifier=args.classifier,
            topping=not args.ablate_topping,
            use_cti=not args.ablate_cti,
        )
        output, stats = assisted_decode(session, prompt, cap)
        baseline, _ = greedy_decode(model, prompt, cap)
        if output != baseline:
            raise LosslessnessError(page.page_id, args.method, args.model)
    _emit(
        {
            "page_id": page.page_id,
            "markdown": tokenizer.decode(output),
            "stats": {
                "forward_passes": stats.forward_passes,
                "tokens_emitted": stats.tokens_emitted,
                "accepted": stats.candidate_tokens_accepted,
                "wall_ms": stats.wall_time * 1000.0,
                "cti_ms": stats.cti_time * 1000.0,
            },
        }
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    config = BenchConfig(
        corpus_dir=args.corpus,
        model=args.model,
        methods=tuple(args.methods.split(",")),
        use_cti=not args.ablate_cti,
        topping=not args.ablate_topping,
        classifier=args.classifier,
        tokenizer=args.tokenizer,
        draft=_draft_config(args),
        jobs=args.jobs,
        seed=args.seed,
        max_new_tokens=args.max_new_tokens,
    )
    rows = run_benchmark(config)
    if args.report:
        fmt = "csv" if args.report.endswith(".csv") else args.format
        Path(args.report).write_text(emit_report(rows, fmt), encoding="utf-8")
        logger.info("report written to %s", args.report)
    _emit([row.as_dict() for row in rows])
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    spec = GenSpec(
        pages=args.pages,
        copyable=args.copyable,
        decoys=args.decoys,
        seed=args.seed,
        page_numbers=not args.no_page_numbers,
        headers=not args.no_headers,
        math=not args.no_math,
    )
    pages = generate_corpus(spec, args.out)
    _emit({"pages": len(pages), "out_dir": str(args.out), "seed": args.seed})
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = Path(args.pred).read_text(encoding="utf-8")
    ref = Path(args.ref).read_text(encoding="utf-8")
    _emit(score_pair(pred, ref).as_dict())
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="pagelookup", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identify", help="label page spans KEEP/DELETE")
    p.add_argument("--input", required=True)
    p.add_argument("--classifier", choices=["heuristic", "gold"], default="heuristic")
    p.add_argument("--config", help="heuristic config JSON")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("decode", help="decode one page with an oracle model")
    p.add_argument("--page", required=True)
    p.add_argument("--model", choices=["replay", "ngram", "perturbed"], default="replay")
    p.add_argument("--method", choices=["scratch", "pld", "mpld", "cld"], default="cld")
    p.add_argument("--max-new-tokens", type=int, default=None)
    p.add_argument("--tokenizer", choices=["byte", "whitespace"], default="byte")
    p.add_argument("--classifier", choices=["heuristic", "gold"], default="heuristic")
    p.add_argument("--ablate-cti", action="store_true")
    p.add_argument("--ablate-topping", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    _add_draft_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("bench", help="benchmark methods over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", choices=["replay", "ngram", "perturbed"], default="replay")
    p.add_argument("--methods", default="scratch,mpld,cld", help="comma-separated subset of scratch,pld,mpld,cld")
    p.add_argument("--ablate-cti", action="store_true")
    p.add_argument("--ablate-topping", action="store_true")
    p.add_argument("--classifier", choices=["heuristic", "gold"], default="gold")
    p.add_argument("--tokenizer", choices=["byte", "whitespace"], default="whitespace")
    p.add_argument("--report", help="write a report file")
    p.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-new-tokens", type=int, default=None)
    _add_draft_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-corpus", help="generate a synthetic labeled corpus")
    p.add_argument("--pages", type=int, required=True)
    p.add_argument("--copyable", type=float, default=0.8)
    p.add_argument("--decoys", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-page-numbers", action="store_true")
    p.add_argument("--no-headers", action="store_true")
    p.add_argument("--no-math", action="store_true")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("eval", help="score a prediction against a reference")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("CLD_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LosslessnessError as exc:
        logger.error("%s", exc)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVARIANT
    except (PageSchemaError, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
