"""Reference adapter speaking the wire protocol with the chain baseline.

    python -m robustparse.chain_adapter < sentences.txt

Useful as a template for wrapping real parsers and as a protocol fixture.
"""

import sys

from .corpus import CorpusError, tokenize
from .parsegraph import ParseOutcome, write_conll_block
from .parsers.builtin import chain_parse


def main() -> None:
    for line in sys.stdin:
        try:
            outcome = ParseOutcome.parsed(chain_parse(tokenize(line)))
        except CorpusError as exc:
            outcome = ParseOutcome.failed(str(exc))
        sys.stdout.write(write_conll_block(outcome))
        sys.stdout.flush()


if __name__ == "__main__":
    main()
