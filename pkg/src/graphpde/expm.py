"""Matrix exponential by scaling and squaring with a [13/13] Padé approximant.

Used as an independent check on the eigenvector-based propagators, so it must
not touch the spectral code path.
"""
import numpy as np

_THETA_13 = 5.371920351148152
_PADE_13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)


def expm(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expm expects a square matrix")
    dtype = np.result_type(a.dtype, np.float64)
    a = a.astype(dtype)
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm > _THETA_13:
        s = int(np.ceil(np.log2(norm / _THETA_13)))
    a = a / 2.0**s

    b = _PADE_13
    ident = np.eye(a.shape[0], dtype=dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r
