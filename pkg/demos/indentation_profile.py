"""Solve the axisymmetric indentation profile of a pressurized shell.

Sweeps the apex depth, reports the indentation force and the compressive
annulus where hoop stress turns negative, and locates the wrinkling-onset
depth.

Run: python3 demos/indentation_profile.py
"""

from inflatekit import ShellParams, critical_depth, solve_indentation, wrinkle_count


def main():
    ball = ShellParams(R=0.13, h=8.6e-4, E=2.3e6, nu=0.4, Pg=1300.0)
    print(f"capillary length l_p = {ball.capillary_length * 1e3:.1f} mm")
    print(f"bendability tau      = {ball.tau:.1f}\n")

    print(f"{'W0':>6s} {'force (dimless)':>16s} {'force (N)':>10s} {'compressive annulus':>22s}")
    for w0 in (-0.5, -1.0, -2.0, -3.0, -4.0):
        sol = solve_indentation(ball, w0)
        if sol.annulus:
            annulus = f"[{sol.annulus[0]:.2f}, {sol.annulus[1]:.2f}]"
        else:
            annulus = "none (no wrinkles)"
        print(f"{w0:6.1f} {sol.force:16.4f} {sol.force_newtons(ball):10.4f} {annulus:>22s}")

    wc = critical_depth(ball)
    depth_mm = abs(wc) * ball.capillary_length**2 / ball.R * 1e3
    print(f"\nwrinkling onset: W0 = {wc:.3f}  (about {depth_mm:.1f} mm of indentation)")
    wk = wrinkle_count(ball)
    print(f"predicted wrinkle count: {wk.count} (unrounded {wk.unrounded:.2f})")


if __name__ == "__main__":
    main()
