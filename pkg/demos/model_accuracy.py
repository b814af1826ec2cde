"""Dipole approximation error against the numerically integrated loop field.

Prints the worst relative magnitude error over random directions at a range
of distances, with the leading-order (a/r)^2 trend alongside.

Usage: python3 demos/model_accuracy.py
"""
import numpy as np

from emtrack.fieldmodel import CoilSpec, biot_savart_field, dipole_field


def main():
    coil = CoilSpec(0, (0.0, 0.0, 0.0), (0.0, 0.0, 1.0), 0.5, 20000.0, loop_radius=0.01)
    a = coil.loop_radius
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(200, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs[0] = (0.0, 0.0, 1.0)
    print(f"{'r/a':>5} {'max err %':>10} {'1.5 (a/r)^2 %':>14}")
    for ratio in (5, 10, 15, 20, 30, 50):
        errs = []
        for d in dirs:
            p = d * ratio * a
            b_loop = biot_savart_field(coil, p).b
            b_dip = dipole_field(coil, p).b
            errs.append(abs(np.linalg.norm(b_dip) / np.linalg.norm(b_loop) - 1.0))
        print(f"{ratio:>5} {100 * max(errs):>10.3f} {150.0 / ratio**2:>14.3f}")


if __name__ == "__main__":
    main()
