#!/usr/bin/env python3
"""Generate the Faddeeva reference table from a truncated Maclaurin series of erf.

w(z) = exp(-z^2) * (1 - erf(-i z)), with
erf(u) = 2/sqrt(pi) * sum_n (-1)^n u^(2n+1) / (n! (2n+1)).

The series is summed at 200 decimal digits.  Once n + 1 >= 2|u|^2 the ratio of
consecutive term magnitudes is below 1/2, so the remainder is bounded by twice
the last term; summation stops when that bound drops below 1e-110 relative to
the running magnitude.  Every value is cross-checked against mpmath.erfc.

Output columns: re_z, im_z, re_w, im_w (17 significant digits).
"""
import sys
import mpmath as mp

mp.mp.dps = 200


def erf_series(u):
    u = mp.mpc(u)
    u2 = u * u
    term = u  # n = 0 term without the 1/(2n+1) factor: (-1)^n u^(2n+1)/n!
    total = mp.mpc(0)
    n = 0
    while True:
        contrib = term / (2 * n + 1)
        total += contrib
        if n + 1 >= 2 * abs(u2) and 2 * abs(contrib) < mp.mpf(10) ** -110 * max(abs(total), 1):
            break
        n += 1
        term = -term * u2 / n
    return 2 / mp.sqrt(mp.pi) * total


def faddeeva(z):
    z = mp.mpc(z)
    return mp.exp(-z * z) * (1 - erf_series(-1j * z))


def main(path):
    rows = []
    for i in range(41):
        for j in range(41):
            x = mp.mpf(-10) + mp.mpf(i) / 2
            y = mp.mpf(-10) + mp.mpf(j) / 2
            z = mp.mpc(x, y)
            w = faddeeva(z)
            check = mp.exp(-z * z) * mp.erfc(-1j * z)
            assert abs(w - check) <= mp.mpf(10) ** -40 * abs(check), (z, w, check)
            rows.append((x, y, w))
    with open(path, "w") as f:
        f.write("re_z,im_z,re_w,im_w\n")
        for x, y, w in rows:
            f.write("%s,%s,%s,%s\n" % tuple(mp.nstr(v, 17, min_fixed=0, max_fixed=0, strip_zeros=False) if v != 0 else "0.0"
                                          for v in (x, y, w.real, w.imag)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "faddeeva_reference.csv")
