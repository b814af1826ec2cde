"""How averaging repeated acquisitions shrinks the grid error.

For a few noise levels, runs a small accuracy grid and compares the
single-frame RMS error with the error of the per-point mean, next to the
linearized prediction.

Usage: python3 demos/noise_averaging.py
"""
import math

from emtrack.bench import bench_grid, grid_points, position_noise_rms
from emtrack.config import PipelineConfig
from emtrack.pose import Pose5DOF


def main(reps=50):
    cfg = PipelineConfig()
    centre = Pose5DOF(*grid_points(cfg, (3, 3))[4], 0.0, 0.0)
    print(f"{'sigma V':>10} {'predicted mm':>13} {'single mm':>10} {'mean mm':>9} {'ratio':>6}")
    for sigma in (5e-6, 2e-5, 5e-5):
        rep = bench_grid(cfg, points=(3, 3), reps=reps, noise_sigma=sigma)
        predicted = position_noise_rms(cfg, centre, sigma) * 1000.0
        ratio = rep.single_frame_rms_mm / rep.rms_error_mm
        print(f"{sigma:>10.1e} {predicted:>13.3f} {rep.single_frame_rms_mm:>10.3f} "
              f"{rep.rms_error_mm:>9.4f} {ratio:>6.2f}")
    print(f"expected ratio about sqrt({reps}) = {math.sqrt(reps):.2f}")


if __name__ == "__main__":
    main()
