"""Evaluate every pinned scoring formula at 50-digit precision.

Prints the worked-example rows of FORMULAS.md. Written from the formula
text alone, independent of the package code.

    python3 tools/formulas_oracle.py
"""

from mpmath import mp, mpf, log, ln, e, pi, power
mp.dps = 50
tf, df, ctf, dl, N, T = mpf(3), mpf(5), mpf(12), mpf(40), mpf(100), mpf(5000)
avgdl = T / N
lg2 = lambda x: log(x, 2)
def norm(kind):
    return {"H1": tf*avgdl/dl, "H2": tf*lg2(1+avgdl/dl), "H3": (tf+800*ctf/T)/(dl+800)*800,
            "Z": tf*power(avgdl/dl, mpf("0.3")), "none": tf}[kind]
def bm(kind, x):
    if kind == "BE":
        F = ctf+1+x; NN = F+N
        f = lambda n, m: (m+mpf("0.5"))*lg2(n/m) + (n-m)*lg2(n)
        return -lg2((NN-1)*e) + f(NN+F-1, NN+F-x-2) - f(F, F-x)
    if kind == "D":
        F = ctf+1+x; phi = x/F; nphi = 1-phi; p = 1/(N+1)
        return (phi*lg2(phi/p) + nphi*lg2(nphi/(1-p)))*F + mpf("0.5")*lg2(1+2*pi*x*nphi)
    if kind == "G":
        F = ctf+1; lam = F/(N+F); return lg2(lam+1) + x*lg2((1+lam)/lam)
    if kind == "IF":
        F = ctf+1; return x*lg2(1+(N+1)/(F+mpf("0.5")))
    if kind == "IN":
        return x*lg2((N+1)/(df+mpf("0.5")))
    if kind == "INE":
        F = ctf+1; ne = N*(1-power((N-1)/N, F)); return x*lg2((N+1)/(ne+mpf("0.5")))
    if kind == "P":
        F = ctf+1; lam = F/(N+1)
        return x*lg2(x/lam) + (lam + 1/(12*x) - x)*lg2(e) + mpf("0.5")*lg2(2*pi*x)
def ae(kind, x):
    return {"B": (ctf+2)/((df+1)*(x+1)), "L": 1/(x+1), "none": mpf(1)}[kind]
def ib(dist, lamk, x):
    lam = (df+1)/(N+1) if lamk == "DF" else (ctf+1)/(N+1)
    if dist == "LL": return -ln(lam/(x+lam))
    return -ln((power(lam, x/(x+1)) - lam)/(1-lam))
rows = []
idf = ln(1 + (N-df+mpf("0.5"))/(df+mpf("0.5")))
rows.append(("bm25:k1=1.2,b=0.75", idf*tf*mpf("2.2")/(tf+mpf("1.2")*(mpf("0.25")+mpf("0.75")*dl/avgdl))))
rows.append(("lmd:mu=2000", ln(1+tf/(2000*ctf/T)) + ln(mpf(2000)/(dl+2000))))
for b in ["BE","D","G","IF","IN","INE","P"]:
    rows.append((f"dfr:{b}:none:none", bm(b, tf)))
for a in ["B","L"]:
    rows.append((f"dfr:IF:{a}:none", ae(a, tf)*bm("IF", tf)))
for n in ["H1","H2","H3","Z"]:
    rows.append((f"dfr:IF:none:{n}", bm("IF", norm(n))))
rows.append(("dfr:IF:B:H2", ae("B", norm("H2"))*bm("IF", norm("H2"))))
for d, l, n in [("LL","DF","none"),("SPL","DF","none"),("LL","TTF","none"),("SPL","TTF","none"),("SPL","DF","H2")]:
    rows.append((f"ib:{d}:{l}:{n}".lower(), ib(d, l, norm(n))))
for name, v in rows:
    print(f"| `{name}` | {mp.nstr(max(v, 0), 15)} |" + (" raw value negative, floored to 0" if v < 0 else ""))
