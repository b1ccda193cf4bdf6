"""kdvdelta: inverse scattering, long-time asymptotics, and a direct
pseudo-spectral solver for the KdV equation u_t - 6 u u_x + u_xxx = 0 with
multi-spike delta initial data u(x, 0) = -sum_n U_n delta(x - x_n)."""

__version__ = "0.1.0"
