"""Scalar reference computations for the frozen values in the C++ unit tests.

Pure-Python loops only, no shared code with the library. Run with
`python3 tests/oracles/hand_oracles.py` to regenerate the printed constants.
"""
import itertools
import math


def softmax(xs):
    m = max(xs)
    e = [math.exp(x - m) for x in xs]
    s = sum(e)
    return [v / s for v in e]


def matvec(m, v):
    return [sum(m[i][j] * v[j] for j in range(len(v))) for i in range(len(m))]


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def section(name):
    print(f"\n== {name}")


# ---- losses -----------------------------------------------------------------
section("rank loss (1,-1) labels (1,0)")
p = softmax([1.0, -1.0])
rank = -math.log(p[0])
print("p =", p, "loss =", rank)

section("attention loss (0.7,0.2,0.1) labels (1,0,0)")
attn = -math.log(0.7)
print("loss =", attn)
section("combined alpha=2")
print("total =", 2 * rank + attn)

# ---- MAP / MRR ----------------------------------------------------------------
section("AP of ranked labels (0,1,1,0)")
ranked = [0, 1, 1, 0]
hits, precs = 0, []
for r, y in enumerate(ranked, start=1):
    if y:
        hits += 1
        precs.append(hits / r)
print("AP =", sum(precs) / len(precs), "RR =", 1 / (ranked.index(1) + 1))

# ---- threshold metrics -----------------------------------------------------
section("threshold hand case")
scores, gold = [0.9, 0.4, 0.6, 0.1], [1, 0, 1, 0]
for tau in (0.5, 0.3):
    pred = [1 if s > tau else 0 for s in scores]
    tp = sum(1 for a, b in zip(pred, gold) if a and b)
    prec = tp / sum(pred) if sum(pred) else 0.0
    rec = tp / sum(gold)
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    print(f"tau={tau} precision={prec} recall={rec} f1={f1} em={int(pred == gold)}")


# ---- graph edge enumeration --------------------------------------------------
def enumerate_edges(sizes, kind):
    nodes = [("q", None, None)]
    for p, s in enumerate(sizes):
        for i in range(s):
            nodes.append(("s", p, i))
    count = 0
    for a, b in itertools.combinations(range(len(nodes)), 2):
        na, nb = nodes[a], nodes[b]
        edge = False
        if na[0] == "q" or nb[0] == "q":
            edge = kind != "type3"
        elif na[1] == nb[1]:
            if kind == "type1":
                edge = abs(na[2] - nb[2]) == 1
            else:
                edge = True
        else:
            edge = kind != "type2" and na[2] == 0 and nb[2] == 0
        count += edge
    return count


section("edge enumeration")
for sizes, kind in [([3, 2], "full"), ([3, 2], "type1"), ([1], "full"), ([1], "type3"), ([2, 2, 2], "type2")]:
    print(sizes, kind, enumerate_edges(sizes, kind))


# ---- propagation -------------------------------------------------------------
def hop(states, adj, w, wp):
    n = len(states)
    att, agg, new = [], [], []
    for v in range(n):
        nbrs = adj[v]
        if not nbrs:
            att.append({})
            a_v = [0.0] * len(states[v])
        else:
            s = [dot(states[v], matvec(w, states[u])) for u in nbrs]
            a = softmax(s)
            att.append(dict(zip(nbrs, a)))
            pre = [0.0] * len(states[v])
            for weight, u in zip(a, nbrs):
                t = matvec(w, states[u])
                pre = [x + weight * y for x, y in zip(pre, t)]
            a_v = [math.tanh(x) for x in pre]
        agg.append(a_v)
        new.append([math.tanh(x) for x in matvec(wp, states[v] + a_v)])
    return att, agg, new


section("3-node path, one hop")
states = [[0.5, -0.2], [0.1, 0.4], [-0.3, 0.8]]
adj = {0: [1], 1: [0, 2], 2: [1]}
W = [[0.6, -0.1], [0.2, 0.3]]
WP = [[0.5, -0.3, 0.2, 0.1], [0.1, 0.4, -0.2, 0.3]]
att, agg, new = hop(states, adj, W, WP)
print("attention", att)
print("aggregate", agg)
print("next", new)

section("5-node [2,2] full graph, two hops")
states = [[0.2, -0.1], [0.4, 0.3], [-0.5, 0.1], [0.0, 0.6], [0.3, -0.4]]
adj = {0: [1, 2, 3, 4], 1: [0, 2, 3], 2: [0, 1], 3: [0, 1, 4], 4: [0, 3]}
Ws = [[[0.6, -0.1], [0.2, 0.3]], [[-0.4, 0.5], [0.1, 0.7]]]
WPs = [[[0.5, -0.3, 0.2, 0.1], [0.1, 0.4, -0.2, 0.3]],
       [[0.3, 0.2, -0.5, 0.4], [-0.1, 0.6, 0.2, -0.3]]]
for k in range(2):
    att, agg, states = hop(states, adj, Ws[k], WPs[k])
    print(f"hop {k + 1} question attention", att[0])
    print(f"hop {k + 1} states", states)

# ---- scoring head ------------------------------------------------------------
section("scoring head d'=2 width 2")
q, s = [0.3, -0.6], [0.8, 0.1]
x = q + s + [a * b for a, b in zip(q, s)]
W1 = [[0.1, -0.2, 0.3, 0.05, -0.4, 0.2], [0.25, 0.1, -0.3, 0.2, 0.15, -0.1]]
b1 = [0.05, -0.1]
w2 = [0.7, -0.5]
b2 = 0.2
hidden = [math.tanh(v + b) for v, b in zip(matvec(W1, x), b1)]
print("score =", dot(w2, hidden) + b2)

# ---- GRU single step from zero state ----------------------------------------
section("GRU one step, zero initial state")
xg = [0.5, -1.0]
Wz = [[0.2, -0.1], [0.4, 0.3]]; bz = [0.1, -0.2]
Wn = [[-0.3, 0.5], [0.6, 0.1]]; bn = [0.0, 0.05]
z = [sigmoid(v + b) for v, b in zip(matvec(Wz, xg), bz)]
n = [math.tanh(v + b) for v, b in zip(matvec(Wn, xg), bn)]
print("h =", [(1 - zi) * ni for zi, ni in zip(z, n)])

# ---- compare-aggregate -------------------------------------------------------
section("compaggr attention 2x2")
Qc = [[1.0, 0.0], [0.5, -1.0]]     # columns q_i
Sc = [[0.2, 0.3], [-0.4, 1.0], [0.7, -0.2]]  # columns s_j (third used by score test)
Wc = [[0.3, 0.1], [-0.2, 0.5]]


def attend(qcols, scols, w):
    out = []
    for sj in scols:
        logits = [dot(matvec(w, qi), sj) for qi in qcols]
        a = softmax(logits)
        out.append([sum(a[i] * qcols[i][r] for i in range(len(qcols))) for r in range(len(sj))])
    return out


AQ = attend(Qc, Sc[:2], Wc)
print("A^Q columns", AQ)

section("compaggr score, 3 sentence tokens, one width-2 filter")
AQ3 = attend(Qc, Sc, Wc)
C = [[a * s for a, s in zip(ac, sc)] for ac, sc in zip(AQ3, Sc)]  # columns
F = [[0.4, -0.3], [0.2, 0.5]]  # F[row][offset]
bf = 0.1
feats = []
for j in range(len(C) - 1):
    acc = bf
    for r in range(2):
        for t in range(2):
            acc += F[r][t] * C[j + t][r]
    feats.append(math.tanh(acc))
R = max(feats)
Wout = [0.8, -0.6]
bout = [0.05, -0.05]
print("features", feats, "R =", R)
print("yhat =", softmax([R * Wout[0] + bout[0], R * Wout[1] + bout[1]]))

section("compaggr loss, 3 pairs")
preds = [(0.8, 0.2), (0.3, 0.7), (0.6, 0.4)]
labels = [1, 0, 0]  # true-class flag; class 0 is "true"
print("loss =", -sum(math.log(p[0] if y else p[1]) for p, y in zip(preds, labels)))
