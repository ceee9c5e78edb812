"""Low-level kernels shared by the mean-field solvers."""

from __future__ import annotations

import numpy as np

__all__ = ["bernoulli_ratio", "solve_tridiagonal", "lax_wendroff_step"]


def bernoulli_ratio(w: np.ndarray) -> np.ndarray:
    """Evaluate w / (exp(w) - 1) stably for any real w.

    The value tends to 1 at w = 0, to -w for large negative w, and to 0
    for large positive w; the crossover thresholds keep the relative
    error at the switch below 1e-15.
    """
    w = np.asarray(w, dtype=float)
    safe = np.where((w > -36.0) & (w < 36.0) & (w != 0.0), w, 1.0)
    mid = safe / np.expm1(safe)
    out = np.where(w <= -36.0, -w, np.where(w >= 36.0, 0.0, mid))
    return np.where(w == 0.0, 1.0, out)


def solve_tridiagonal(sub: np.ndarray, dia: np.ndarray, sup: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a batch of tridiagonal systems by the Thomas algorithm.

    All arrays are (B, n): row b holds one system with subdiagonal
    ``sub[b, 1:]``, diagonal ``dia[b]``, and superdiagonal ``sup[b, :-1]``
    (the unused first/last entries are ignored).  Raises on a vanishing
    pivot; the forward sweep is stable for the diagonally dominant
    systems the solvers assemble.
    """
    sub = np.asarray(sub, dtype=float)
    dia = np.asarray(dia, dtype=float)
    sup = np.asarray(sup, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if not sub.shape == dia.shape == sup.shape == rhs.shape or dia.ndim != 2:
        raise ValueError("all bands and the right-hand side must share one (B, n) shape")
    n = dia.shape[1]
    scale = np.abs(dia).max(axis=1)
    tiny = 1.0e-14 * np.where(scale > 0.0, scale, 1.0)
    cp = np.empty_like(dia)
    dp = np.empty_like(rhs)
    piv = dia[:, 0].copy()
    if np.any(np.abs(piv) <= tiny):
        raise ValueError("singular tridiagonal system")
    cp[:, 0] = sup[:, 0] / piv
    dp[:, 0] = rhs[:, 0] / piv
    for i in range(1, n):
        piv = dia[:, i] - sub[:, i] * cp[:, i - 1]
        if np.any(np.abs(piv) <= tiny):
            raise ValueError("singular tridiagonal system")
        cp[:, i] = sup[:, i] / piv
        dp[:, i] = (rhs[:, i] - sub[:, i] * dp[:, i - 1]) / piv
    out = np.empty_like(rhs)
    out[:, -1] = dp[:, -1]
    for i in range(n - 2, -1, -1):
        out[:, i] = dp[:, i] - cp[:, i] * out[:, i + 1]
    return out


def lax_wendroff_step(values: np.ndarray, speed, spacing: float, dt: float, boundary: str = "zero") -> np.ndarray:
    """One conservative Lax-Wendroff step of du/dt + d(a u)/ds = 0.

    Advects along the last axis with the cell-centered speed field ``a``
    (broadcast against ``values``); interface speeds are arithmetic means
    of the neighbors.  ``boundary`` is ``"zero"`` (no inflow, the function
    vanishes outside) or ``"periodic"``.  Stability needs |a| dt <=
    spacing; the caller chooses dt accordingly.
    """
    f = np.asarray(values, dtype=float)
    a = np.broadcast_to(np.asarray(speed, dtype=float), f.shape)
    if boundary == "zero":
        fp = np.concatenate([np.zeros_like(f[..., :1]), f, np.zeros_like(f[..., :1])], axis=-1)
        ap = np.concatenate([a[..., :1], a, a[..., -1:]], axis=-1)
    elif boundary == "periodic":
        fp = np.concatenate([f[..., -1:], f, f[..., :1]], axis=-1)
        ap = np.concatenate([a[..., -1:], a, a[..., :1]], axis=-1)
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    au = ap * fp
    mid = 0.5 * (ap[..., 1:] + ap[..., :-1])
    flux = 0.5 * (au[..., 1:] + au[..., :-1]) - (0.5 * dt / spacing) * mid * (au[..., 1:] - au[..., :-1])
    return f - (dt / spacing) * (flux[..., 1:] - flux[..., :-1])
