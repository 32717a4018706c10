"""Write q-expansion coefficients of the newform attached to y^2 + y = x^3 - x (conductor 37).

a_p = p + 1 - #E(F_p) for p != 37 and a_37 = -1 (the global root number -1 equals -w_37 and
a_37 = -w_37), then multiplicativity and the Hecke recursion.

    python tools/gen_37a.py 500 > tests/data/37a.txt
"""
import sys

from sympy import factorint, primerange


def count_points(p: int) -> int:
    squares = [0] * p
    for y in range(p):
        squares[(y * y + y) % p] += 1
    return 1 + sum(squares[(x ** 3 - x) % p] for x in range(p))


def coefficients(n_max: int) -> list[int]:
    ap = {}
    for p in primerange(2, n_max + 1):
        ap[p] = -1 if p == 37 else p + 1 - count_points(p)
    a = [0] * (n_max + 1)
    a[1] = 1
    for n in range(2, n_max + 1):
        val = 1
        for p, k in factorint(n).items():
            if p == 37:
                val *= (-1) ** k
                continue
            prev, cur = 1, ap[p]
            for _ in range(k - 1):
                prev, cur = cur, ap[p] * cur - p * prev
            val *= cur
        a[n] = val
    return a[1:]


def main() -> None:
    n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 500
    print("# level 37 sign -1")
    for n, c in enumerate(coefficients(n_max), 1):
        print(n, c)


if __name__ == "__main__":
    main()
