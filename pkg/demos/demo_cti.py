"""Walkthrough: copyable-text identification on one synthetic page.

The layout heuristic labels each span KEEP or DELETE (page numbers and
headers in the margin bands, math-dense spans anywhere), and we score it
against the page's gold labels. The span pool that feeds copy lookup is
then built from the KEEP runs.
"""

from pagelookup import (
    GenSpec,
    build_page,
    build_span_pool,
    classify_gold,
    classify_heuristic,
    make_tokenizer,
    math_symbol_density,
    span_label_f1,
    vote_span_label,
    Label,
)


def main():
    page = build_page(GenSpec(pages=1, copyable=0.7, decoys=1, seed=42), 0)
    labeling = classify_heuristic(page)
    gold = classify_gold(page)

    print(f"{'id':>3} {'pred':6s} {'gold':6s} {'density':>7} text")
    for span in page.spans:
        density = math_symbol_density(span.text)
        mark = "" if labeling[span.id] is gold[span.id] else "  <-- mismatch"
        print(f"{span.id:>3} {labeling[span.id].value:6s} {gold[span.id].value:6s} "
              f"{density:7.2f} {span.text[:44]}{mark}")

    score = span_label_f1(labeling, gold)
    print(f"\nspan-level F1 vs gold: {score.f1:.3f} "
          f"(precision {score.precision:.3f}, recall {score.recall:.3f})")

    # Token-level classifiers aggregate to span labels by majority vote.
    votes = [Label.KEEP, Label.KEEP, Label.DELETE]
    print(f"vote over {[v.value for v in votes]} -> {vote_span_label(votes).value}")

    tokenizer = make_tokenizer("whitespace", [page])
    pool = build_span_pool(page, labeling, tokenizer)
    print(f"\nspan pool: {len(pool)} merged copyable spans")
    for pooled in pool.spans:
        print(f"  pool[{pooled.pool_index}] from spans {pooled.source_span_ids}: "
              f"{len(pooled.tokens)} tokens")


if __name__ == "__main__":
    main()
