"""Stand-alone table builder used to produce external_2_2_1d_b500.ctm.

Written without reference to the Rust code: a dictionary tape, the rule index
read as base-(m*(2n+1)) digits with entry k = state*m + symbol, halts listed
before moves, moves ordered (write, direction, next state) with left before
right. Each machine runs on a blank 0 tape and on a blank 1 tape.

    python3 external_ctm.py 2 2 500 > external_2_2_1d_b500.ctm
"""
import sys
from collections import Counter

n, m, budget = (int(a) for a in sys.argv[1:4])
ipe = m * (2 * n + 1)


def decode(i):
    table = []
    for _ in range(n * m):
        c = i % ipe
        i //= ipe
        if c < m:
            table.append(("H", c))
        else:
            c -= m
            write, rest = divmod(c, 2 * n)
            move, nxt = divmod(rest, n)
            table.append(("S", write, -1 if move == 0 else 1, nxt))
    return table


def run(table, blank):
    tape, head, state, lo, hi = {}, 0, 0, 0, 0
    for _ in range(budget):
        ins = table[state * m + tape.get(head, blank)]
        tape[head] = ins[1]
        if ins[0] == "H":
            return "".join(str(tape.get(x, blank)) for x in range(lo, hi + 1))
        head += ins[2]
        state = ins[3]
        lo, hi = min(lo, head), max(hi, head)
    return None


counts = Counter()
size = ipe ** (n * m)
for i in range(size):
    rule = decode(i)
    for blank in range(2):
        out = run(rule, blank)
        if out is not None:
            counts[out] += 1
halting = sum(counts.values())
print(f"#ctm v1 dim=1 states={n} symbols={m} budget={budget} total={2 * size} halting={halting}")
for key, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
    print(f"{key},{c}")
