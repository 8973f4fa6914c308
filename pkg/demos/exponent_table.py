"""Print the exact exponents and theorem ranges for a few (alpha, p) pairs.

Run: python3 demos/exponent_table.py
"""
from nlslab.exponents import ExponentConfig, ExponentDomainError, rational_to_str, theorem_applicability

PAIRS = [(3, 2), (3, "7/4"), ("9/2", "7/4"), (4, "3/2"), (2, "5/4")]


def main():
    print(f"{'alpha':>6} {'p':>6} {'r':>6} {'q':>6} {'decay':>6} {'lifespan':>9}  proven ranges")
    for alpha, p in PAIRS:
        try:
            ec = ExponentConfig.build(alpha, p)
        except ExponentDomainError as e:
            print(f"{alpha!s:>6} {p!s:>6}  {e}")
            continue
        life = "-" if ec.lifespan_exp is None else rational_to_str(ec.lifespan_exp)
        app = theorem_applicability(alpha, p)
        holds = ", ".join(k for k, v in app.items() if v["holds"]) or "none"
        print(
            f"{rational_to_str(ec.alpha):>6} {rational_to_str(ec.p):>6} {rational_to_str(ec.r):>6} "
            f"{rational_to_str(ec.q):>6} {rational_to_str(ec.decay_exp):>6} {life:>9}  {holds}"
        )


if __name__ == "__main__":
    main()
