"""Time the CYK chart fill with the numba kernel against the numpy fallback.

Parses the bundled demo sentences (and longer concatenations of them) with
the demo grammar and checks both backends produce identical charts.

    python benchmarks/bench_cyk.py --repeat 5
"""

import argparse
import statistics
import time
from importlib import resources

import numpy as np

from robustparse.corpus import tokenize
from robustparse.parsers import _kernels, load_grammar, viterbi_chart


def _time(fn, repeat):
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    data = resources.files("robustparse") / "data"
    g = load_grammar(data / "demo_grammar.pcfg")
    lines = (data / "demo_clean.txt").read_text().splitlines()
    sentences = [tokenize(ln).texts for ln in lines]

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if "numba" in backends:
        viterbi_chart(g, sentences[0], backend="numba")  # compile (or load cache) outside the timing

    for s in sentences:
        ref = viterbi_chart(g, s, backend="numpy")
        for b in backends[1:]:
            assert all(np.array_equal(x, y) for x, y in zip(ref, viterbi_chart(g, s, backend=b)))

    print(f"{'workload':<28}" + "".join(f"{b:>12}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    workloads = [("demo corpus (19 sentences)", sentences)]
    for n in (40, 80):
        flat = [w for s in sentences for w in s]
        workloads.append((f"one sentence, {n} words", [flat[:n]]))
    for label, batch in workloads:
        secs = [_time(lambda b=b: [viterbi_chart(g, s, backend=b) for s in batch], args.repeat) for b in backends]
        row = f"{label:<28}" + "".join(f"{t * 1000:>10.1f}ms" for t in secs)
        if len(secs) > 1:
            row += f"   {secs[0] / secs[1]:>6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
