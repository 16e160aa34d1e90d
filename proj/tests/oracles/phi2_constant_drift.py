# Independent oracle for phi_2 with constant drift c (d = 1, Generator convention, sigma = 1):
# outer adaptive quad in theta (tau = sin^2 theta), inner dense Gauss-Legendre over the
# intersection of the two Gaussian factors' 12-SD boxes.
import numpy as np
from scipy import integrate
c = 0.8; t = 1.0
def Q(g): return 2*np.array([[g**3/3, g**2/2],[g**2/2, g]])
xg, wg = np.polynomial.legendre.leggauss(240)
def inner(tau, y):
    g = t - tau
    Q1, Q2 = Q(tau), Q(g); I1, I2 = np.linalg.inv(Q1), np.linalg.inv(Q2)
    n1 = 1/(2*np.pi*np.sqrt(np.linalg.det(Q1))); n2 = 1/(2*np.pi*np.sqrt(np.linalg.det(Q2)))
    # box: first factor mean 0, second factor in eta: y = (ex + g ev, ev) + r
    s1 = np.sqrt(np.diag(Q1)) * 12
    # second factor as a Gaussian in eta: mean solves ex + g ev = yx, ev = yv
    m2 = np.array([y[0] - g*y[1], y[1]]); A = np.array([[1, g],[0, 1]]); Ai = np.linalg.inv(A)
    C2 = Ai @ Q2 @ Ai.T; s2 = np.sqrt(np.diag(C2)) * 12
    lo = np.maximum(-s1, m2 - s2); hi = np.minimum(s1, m2 + s2)
    if np.any(hi <= lo): return 0.0
    ex = 0.5*(hi[0]+lo[0]) + 0.5*(hi[0]-lo[0])*xg; wx = 0.5*(hi[0]-lo[0])*wg
    ev = 0.5*(hi[1]+lo[1]) + 0.5*(hi[1]-lo[1])*xg; wv = 0.5*(hi[1]-lo[1])*wg
    EX, EV = np.meshgrid(ex, ev, indexing='ij')
    q1 = I1[0,0]*EX*EX + 2*I1[0,1]*EX*EV + I1[1,1]*EV*EV
    g1 = tau*(I1[0,0]*EX + I1[0,1]*EV) + I1[0,1]*EX + I1[1,1]*EV
    rx = y[0] - EX - g*EV; rv = y[1] - EV
    q2 = I2[0,0]*rx*rx + 2*I2[0,1]*rx*rv + I2[1,1]*rv*rv
    g2 = g*(I2[0,0]*rx + I2[0,1]*rv) + I2[0,1]*rx + I2[1,1]*rv
    f = c*g1*n1*np.exp(-0.5*q1) * c*g2*n2*np.exp(-0.5*q2)
    return wx @ f @ wv
for dx in (-0.5, 0.0, 0.5):
    for dv in (-0.5, 0.0, 0.5):
        y = (dx, dv)
        val = integrate.quad(lambda th: inner(np.sin(th)**2, y) * np.sin(2*th), 0, np.pi/2, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        print(f"{{{dx}, {dv}, {val!r}}},")
