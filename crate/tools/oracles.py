#!/usr/bin/env python3
"""High-precision reference values frozen into the Rust test suites.

Every quantity here is computed from first principles (direct linear solves of
matching conditions, adaptive high-precision quadrature, Newton iteration on
the outgoing-wave condition, truncated series).  None of it shares code with
the Rust implementation.  Run: python3 tools/oracles.py
"""
import mpmath as mp

mp.mp.dps = 40
pi = mp.pi


def show(name, v):
    if isinstance(v, mp.mpc):
        print(f"{name:40s} re = {mp.nstr(v.real, 20)}  im = {mp.nstr(v.imag, 20)}")
    else:
        print(f"{name:40s} {mp.nstr(v, 20)}")


# --- special functions -------------------------------------------------------
show("erfc(1)", mp.erfc(1))
show("w(i) = e*erfc(1)", mp.e * mp.erfc(1))
# asymptotic oracle for w(iy), y large: w(iy) = erfcx(y) ~ 1/(y sqrt(pi)) sum (-1)^n (2n-1)!!/(2y^2)^n
y = mp.mpf(50)
s, term = mp.mpf(0), mp.mpf(1)
for n in range(0, 12):
    s += term
    term *= -(2 * n + 1) / (2 * y * y)
show("w(50i) asymptotic series", s / (y * mp.sqrt(pi)))

# --- resonance form factor -----------------------------------------------------
kr = mp.mpc(1, -0.1)
D = kr / kr.real
k = 2 * kr
show("form_factor(2k_r), k_r=1-0.1i", 2 * k * (D / (k - kr) + mp.conj(D) / (k + mp.conj(kr))))

# --- delta shell: continuum state by direct 2x2 solve ------------------------
# inside sin(kx); outside B sin(kx) + C cos(kx); continuity + derivative jump at x=1.
def delta_state(eta, k):
    M = mp.matrix([[mp.sin(k), mp.cos(k)], [k * mp.cos(k), -k * mp.sin(k)]])
    rhs = mp.matrix([mp.sin(k), k * mp.cos(k) + eta * mp.sin(k)])
    B, C = mp.lu_solve(M, rhs)
    amp = mp.sqrt(B * B + C * C)
    a = 1 / amp
    delta = mp.atan2(C, B)
    return a, delta

a, delta = delta_state(5, pi)
show("delta eta=5 k=pi: a", a)
show("delta eta=5 k=pi: delta", delta)

def overlap(eta, k):
    a, _ = delta_state(eta, k)
    f = lambda x: mp.sqrt(2 / pi) * a * mp.sin(k * x) * mp.sqrt(2) * mp.sin(pi * x)
    return mp.quad(f, [0, 0.5, 1])
show("delta eta=5 k=2: c(k)", overlap(5, 2))

# pole of the outgoing condition, Newton from pi(1-1/eta)
eta = 5
g = lambda k: k + eta * mp.sin(k) * mp.exp(1j * k)
k1 = mp.findroot(g, pi * (1 - mp.mpf(1) / eta), solver="newton")
show("delta eta=5 pole k1", k1)
show("delta eta=5 Gamma1", -2 * (k1 ** 2).imag)
for eta2 in (2, 10):
    # divide out the trivial root k = 0
    g2 = lambda k: mp.cos(k) + (eta2 - 1j * k) * mp.sin(k) / k
    kk = mp.findroot(g2, pi * (1 - mp.mpf(1) / eta2) - 0.1j, solver="newton")
    show(f"delta eta={eta2} pole k1", kk)

# --- detector: scattering state by direct 2x2 solve ---------------------------
# inside C1 (e^{ikx} - e^{-ikx}); outside e^{-iqx} - S e^{iqx}; unknowns (C1, S).
def detector_state(eta, v0, q):
    k = mp.sqrt(q * q - 1j * v0)
    M = mp.matrix([[2j * mp.sin(k), mp.exp(1j * q)],
                   [-2j * k * mp.cos(k) - eta * 2j * mp.sin(k), -1j * q * mp.exp(1j * q)]])
    rhs = mp.matrix([mp.exp(-1j * q), 1j * q * mp.exp(-1j * q)])
    C1, S = mp.lu_solve(M, rhs)
    return k, C1, S

k, C1, S = detector_state(5, 1, 2)
show("detector eta=5 v0=1 q=2: k", k)
show("detector eta=5 v0=1 q=2: C1", C1)
show("detector eta=5 v0=1 q=2: S", S)
show("detector |S|", abs(S))
# c-normalised state: chi = phi / nu with nu^2 = -S, branch with Re(inside sine amplitude) > 0
nu = mp.sqrt(-S)
beta = 2j * C1 / nu / mp.sqrt(2 * pi)
if beta.real < 0:
    nu, beta = -nu, -beta
f = lambda x: beta * mp.sin(k * x) * mp.sqrt(2) * mp.sin(pi * x)
show("detector c_overlap q=2", mp.quad(f, [0, 0.5, 1]))
show("detector inside amplitude beta*sqrt(pi/2)", beta * mp.sqrt(pi / 2))

# localized state for eta=5, v0=1 (outgoing-only with Im q > 0)
def gdet(q, eta=5, v0=1):
    kk = mp.sqrt(q * q - 1j * v0)
    return kk * mp.cos(kk) + (eta - 1j * q) * mp.sin(kk)
q0 = mp.sqrt(k1 ** 2 + 1j)
qj = mp.findroot(gdet, q0, solver="newton")
show("detector eta=5 v0=1 localized q_j", qj)
show("detector eta=5 v0=1 E_j", qj ** 2 - 1j)
show("detector eta=5 v0=1 -2 Im E_j", -2 * (qj ** 2 - 1j).imag)
