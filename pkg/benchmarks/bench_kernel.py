"""Compare the compiled and pure-Python permanent kernels.

Run with ``python3 benchmarks/bench_kernel.py [--repeat N]``. Each workload is
timed under every available backend and the outputs are checked to agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from telegate.fock import available_backends, use_backend
from telegate.noise import NoiseParams, gate_run
from telegate.protocols import prepare_cluster_chi, prepare_hyper_chi
from telegate.protocols.states import product_input


def _cluster():
    return prepare_cluster_chi(overlap=0.9).state.matrix


def _hyper():
    return prepare_hyper_chi(overlap=0.9).state.matrix


def _cphase_noisy():
    res = gate_run("cphase", product_input("+", "+"), NoiseParams(p2=0.02, overlap=0.9))
    return res.output().matrix


def _cnot_overlap():
    return gate_run("cnot", product_input("H", "+"), NoiseParams(overlap=0.9)).output().matrix


WORKLOADS = {
    "cluster preparation": _cluster,
    "hyper-entangled preparation": _hyper,
    "C-NOT, partial distinguishability": _cnot_overlap,
    "C-Phase, multi-pair emission": _cphase_noisy,
}


def best_time(fn, repeat: int) -> tuple[float, np.ndarray]:
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; only the Python backend is available")
    print(f"{'workload':38s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name, fn in WORKLOADS.items():
        times, outs = {}, {}
        for b in backends:
            with use_backend(b):
                times[b], outs[b] = best_time(fn, args.repeat)
        ref = outs[backends[0]]
        dev = max(np.max(np.abs(o - ref)) for o in outs.values())
        speed = times["python"] / times["compiled"] if "compiled" in times else 1.0
        row = f"{name:38s}" + "".join(f"{times[b]:11.3f}s" for b in backends) + f"{speed:9.1f}x"
        print(row + ("" if dev < 1e-10 else f"  MISMATCH {dev:.1e}"))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
