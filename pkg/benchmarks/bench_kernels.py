"""Compare the compiled and NumPy Lindblad kernels.

    python3 benchmarks/bench_kernels.py [--cutoffs 4,6,8,10] [--steps 50]

Reports the time per right-hand-side evaluation and per RK4 step for the
fig2 parameter set (N = 100, first order) at several Fock cutoffs, plus the
largest elementwise difference between the two backends after the steps.
"""

import argparse
import timeit

import numpy as np

from ensemblemix import MixParams, ModeSpec, build_generator, kernels, phase
from ensemblemix.fock import vacuum_state


def fig2_params(cutoff):
    mode = ModeSpec(cutoff, 100, gamma=1.0, beta=10.0, omega_rabi=30.0)
    return MixParams(mode, mode, eta=0.5, delta_omega=50.0)


def bench(cutoff, steps, repeat):
    p = fig2_params(cutoff)
    args = build_generator(p).kernel_args()
    rho = vacuum_state(p)
    rng = np.random.default_rng(0)
    rho = rho + 1e-3 * (rng.normal(size=rho.shape) + 1j * rng.normal(size=rho.shape))
    rho = 0.5 * (rho + rho.conj().T)
    row = {"M": cutoff, "dim": p.dim}
    finals = {}
    for name in ("cython", "python"):
        backend = kernels.get_backend(name)
        out = np.zeros_like(rho)
        n = max(1, 2000 // cutoff**2) if name == "cython" else max(1, 200 // cutoff**2)
        t_rhs = min(timeit.repeat(lambda: backend.rhs(rho, out, phi=phase(0.1, p), **args),
                                  number=n, repeat=repeat)) / n
        work = rho.copy()
        t_step = min(timeit.repeat(lambda: backend.rk4_advance(work, 0.0, 2.5e-5, steps, phi0=p.phi0,
                                                               dw=p.delta_omega, **args),
                                   number=1, repeat=1)) / steps
        final = rho.copy()
        backend.rk4_advance(final, 0.0, 2.5e-5, steps, phi0=p.phi0, dw=p.delta_omega, **args)
        finals[name] = final
        row[name] = (t_rhs, t_step)
    row["diff"] = float(np.abs(finals["cython"] - finals["python"]).max())
    return row


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cutoffs", default="4,6,8,10")
    parser.add_argument("--steps", type=int, default=50)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    try:
        kernels.get_backend("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; reinstall with Cython available")
    print(f"{'M':>3} {'dim':>5} {'cython rhs':>12} {'python rhs':>12} {'speedup':>8} "
          f"{'cython step':>12} {'python step':>12} {'max diff':>9}")
    for cutoff in (int(c) for c in args.cutoffs.split(",")):
        r = bench(cutoff, args.steps, args.repeat)
        (c_rhs, c_step), (p_rhs, p_step) = r["cython"], r["python"]
        print(f"{r['M']:>3} {r['dim']:>5} {c_rhs * 1e6:>10.1f}us {p_rhs * 1e6:>10.1f}us {p_rhs / c_rhs:>7.1f}x "
              f"{c_step * 1e6:>10.1f}us {p_step * 1e6:>10.1f}us {r['diff']:>9.1e}")


if __name__ == "__main__":
    main()
