import sys
sys.path.insert(0, "src")
import numpy as np
from qmindex.matrix import load_blosum62, derive_symbol_quasimetric

FIG_ORDER = "TSANIVLMKRDEQWFYHGPC"
FIG_ROWS = """
0 3 4 6 5 4 5 6 6 6 7 6 6 13 8 9 10 8 8 10
4 0 3 5 6 6 6 6 5 6 6 5 5 14 8 9 9 6 8 10
5 3 0 8 5 4 5 6 6 6 8 6 6 14 8 9 10 6 8 9
5 3 6 0 7 7 7 7 5 5 5 5 5 15 9 9 7 6 9 12
6 6 5 9 0 1 2 4 8 8 9 8 8 14 6 8 11 10 10 10
5 6 4 9 1 0 3 4 7 8 9 7 7 14 7 8 11 9 9 10
6 6 5 9 2 3 0 3 7 7 10 8 7 13 6 8 11 10 10 10
6 5 5 8 3 3 2 0 6 6 9 7 5 12 6 8 10 9 9 10
6 4 5 6 7 6 6 6 0 3 7 4 4 14 9 9 9 8 8 12
6 5 5 6 7 7 6 6 3 0 8 5 4 14 9 9 8 8 9 12
6 4 6 5 7 7 8 8 6 7 0 3 5 15 9 10 9 7 8 12
6 4 5 6 7 6 7 7 4 5 4 0 3 14 9 9 8 8 8 13
6 4 5 6 7 6 6 5 4 4 6 3 0 13 9 8 8 8 8 12
7 7 7 10 7 7 6 6 8 8 10 8 7 0 5 5 10 8 11 11
7 6 6 9 4 5 4 5 8 8 9 8 8 10 0 4 9 9 11 11
7 6 6 8 5 5 5 6 7 7 9 7 6 9 3 0 6 9 10 11
7 5 6 5 7 7 7 7 6 5 7 5 5 13 7 5 0 8 9 12
7 4 4 6 8 7 8 8 7 7 7 7 7 13 9 10 10 0 9 12
6 5 5 8 7 6 7 7 6 7 7 6 6 15 10 10 10 8 0 12
6 5 4 9 5 5 5 6 8 8 9 9 8 13 8 9 11 9 10 0
"""

fig = np.array([[int(v) for v in line.split()] for line in FIG_ROWS.strip().splitlines()])
qm = derive_symbol_quasimetric(load_blosum62())
print("quasi-metric validated OK")

mismatch = 0
for r, a in enumerate(FIG_ORDER):       # figure row symbol
    for c, b in enumerate(FIG_ORDER):   # figure column symbol
        want = fig[r, c]                # figure shows d(column, row)
        got = qm.dist(b, a)
        if want != got:
            mismatch += 1
            print(f"MISMATCH fig[{a}][{b}]={want} but d({b},{a})={got}")
print("mismatches (transposed read):", mismatch)

# sanity: untransposed read should NOT match everywhere (asymmetry)
direct = sum(
    1
    for r, a in enumerate(FIG_ORDER)
    for c, b in enumerate(FIG_ORDER)
    if fig[r, c] != qm.dist(a, b)
)
print("mismatches (direct read):", direct)
print("d(T,S) =", qm.dist("T", "S"), " d(S,T) =", qm.dist("S", "T"))
print("d(I,V) =", qm.dist("I", "V"), " d(V,I) =", qm.dist("V", "I"))
