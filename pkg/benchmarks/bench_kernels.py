"""Compare the compiled and NumPy statevector kernels on noisy QV sampling.

    python3 benchmarks/bench_kernels.py [--widths 4 6 8] [--shots 2000]
"""
import argparse
import time

from volbench import kernels
from volbench.compiler import compile_circuit
from volbench.ensembles import qv_ensemble
from volbench.simulator import NoiseModel, sample_noisy


def bench(circuit, noise, shots, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        rec = sample_noisy(circuit, noise, shots, seed=7, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, rec


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--widths", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--shots", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    noise = NoiseModel(eps1=0.01, eps2=0.03)
    backends = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(backends)}")
    print(f"{'w':>3} {'d':>3} {'gates':>6} " + " ".join(f"{b + ' [s]':>14}" for b in backends) + "  speedup")
    for w in args.widths:
        c = compile_circuit(qv_ensemble((w, args.depth), K=1, seed=0).circuits[0], "Free")
        n_gates = sum(len(layer.gates) for layer in c.all_layers())
        times, records = {}, {}
        for b in backends:
            times[b], records[b] = bench(c, noise, args.shots, b, args.repeat)
        same = len({r.dumps() for r in records.values()}) == 1
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        cols = " ".join(f"{times[b]:14.4f}" for b in backends)
        print(f"{w:3d} {args.depth:3d} {n_gates:6d} {cols}  {speed:6.1f}x{'' if same else '  (counts differ!)'}")


if __name__ == "__main__":
    main()
