"""Independent reference values for the C++ test suites.

Everything here is computed with mpmath at high precision, straight from the
defining formulas, without touching the C++ implementation. The printed
values are frozen into the doctest suites.
"""
import mpmath as mp

mp.mp.dps = 40


def show(label, value):
    print(f"{label}: {mp.nstr(value, 20)}")


# power rule D^a x^n = Gamma(n+1)/Gamma(n+1-a) x^(n-a)
show("power x^2 a=0.5 x=1", mp.gamma(3) / mp.gamma(2.5))
show("power x a=0.5 x=1", mp.gamma(2) / mp.gamma(1.5))
show("constant a=0.5 x=1", 1 / mp.gamma(0.5))

# Taylor surrogate at a=0.5, dx=1, f=1, grad=1
a = mp.mpf("0.5")
show("taylor a=0.5", 1 / mp.gamma(1 - a) + a / mp.gamma(a))

# fractional Jacobian of (x^2-y^2, 3xy) at alpha=1.2, (x,y)=(1,1),
# assembled from the per-term power rule.
a = mp.mpf("1.2")
x = y = mp.mpf(1)
def pw(c, n, v):
    return c * mp.gamma(n + 1) / mp.gamma(n + 1 - a) * v ** (n - a)
J = [[pw(1, 2, x) + pw(-y**2, 0, x), pw(x**2, 0, y) + pw(-1, 2, y)],
     [pw(3 * y, 1, x), pw(3 * x, 1, y)]]
for i in range(2):
    for j in range(2):
        show(f"J1.2[{i}][{j}]", J[i][j])

# FGF recurrence, f(x) = x^2/2, X0 = 1, eta = 0.01, alpha = 0.5
def binom(al, k):
    r = mp.mpf(1)
    for j in range(k):
        r *= (al - j)
    return r / mp.factorial(k)
al = mp.mpf("0.5")
eta = mp.mpf("0.01")
hist = [mp.mpf(1)]
for k in range(2):
    g = hist[-1]
    nxt = -eta**al * g
    for j in range(k + 1):
        nxt += (-1)**j * binom(al, j + 1) * hist[k - j]
    hist.append(nxt)
show("fgf X1", hist[1])
show("fgf X2", hist[2])

# adagrad two steps from 0, eta=1, g=3, eps inside sqrt = 1e-10
ep = mp.mpf("1e-10")
show("adagrad X2", -3 / mp.sqrt(9 + ep) - 3 / mp.sqrt(18 + ep))

# rmsprop one step from 0, eta=0.01, g=2, decay 0.9, eps 1e-8 outside sqrt
show("rmsprop X1", -mp.mpf("0.01") * 2 / (mp.sqrt(mp.mpf("0.1") * 4) + mp.mpf("1e-8")))

# adam two steps from 0, eta=0.1, g=(1, then -2), betas (0.9, 0.999), eps 1e-8
b1, b2, e8 = mp.mpf("0.9"), mp.mpf("0.999"), mp.mpf("1e-8")
m = v = mp.mpf(0)
xa = mp.mpf(0)
for t, g in enumerate([mp.mpf(1), mp.mpf(-2)], start=1):
    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g * g
    xa -= mp.mpf("0.1") * (m / (1 - b1**t)) / (mp.sqrt(v / (1 - b2**t)) + e8)
show("adam X2", xa)

# meta loss, sphere, X=(1,0) -> (0,0)
d = mp.mpf("1e-12")
show("meta loss sphere", mp.log(d) - mp.log(1 + d))

# Himmelblau minima via Newton from standard approximations
def himm(v):
    x, y = v
    return (x**2 + y - 11)**2 + (x + y**2 - 7)**2
for guess in [(3, 2), (-2.805118, 3.131312), (-3.779310, -3.283186), (3.584428, -1.848126)]:
    sol = mp.findroot([lambda x, y: mp.diff(lambda t: himm((t, y)), x),
                       lambda x, y: mp.diff(lambda t: himm((x, t)), y)], guess)
    print("himmelblau min:", mp.nstr(sol[0], 20), mp.nstr(sol[1], 20))

# chaotic1d global minimum on [-4, 4]
f = lambda x: mp.log(x**2 + 1 + mp.sin(3 * x)) + mp.mpf("1.5")
xs = mp.findroot(lambda x: 2 * x + 3 * mp.cos(3 * x), -0.43)
show("chaotic1d argmin", xs)
show("chaotic1d min", f(xs))
grid_min = min(float(x**2 + 1 + mp.sin(3 * x)) for x in mp.linspace(-4, 4, 8001))
print("chaotic1d argument grid min:", grid_min)

# Lorenz Euler rollout, sigma=10, rho=28*e^0.1 vs rho=28, beta=8/3
def rollout(sig, rho, steps=400, dt=mp.mpf("0.005")):
    beta = mp.mpf(8) / 3
    s = [mp.mpf("1.2"), mp.mpf("1.3"), mp.mpf("1.6")]
    traj = [s]
    for _ in range(steps):
        x, y, z = s
        s = [x + dt * sig * (y - x), y + dt * (x * (rho - z) - y), z + dt * (x * y - beta * z)]
        traj.append(s)
    return traj
t_true = rollout(mp.mpf(10), mp.mpf(28))
t_pert = rollout(mp.mpf(10), mp.mpf(28) * mp.e**mp.mpf("0.1"))
mse = sum(sum((a - b)**2 for a, b in zip(p, q)) for p, q in zip(t_pert, t_true)) / len(t_true)
show("lorenz loss drho=0.1", mse)
show("lorenz s1 x", t_true[1][0])
show("lorenz s1 y", t_true[1][1])
show("lorenz s1 z", t_true[1][2])
