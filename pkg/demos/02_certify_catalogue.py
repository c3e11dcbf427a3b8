"""Certify every catalogue scenario and tabulate the worst margins.

Each row shows the long-time-existence verdict, the asymptotic verdict,
the smallest cone margins and the fitted exponent bounds. Compare the
verdicts with the expectations stored on each scenario.
"""

from imcf_lab import hypothesis_certifier as hc
from imcf_lab.scenarios import CATALOGUE, make_scenario


def main():
    head = f"{'scenario':26s} {'lte':4s} {'asym':4s} {'G_cone':>11s} {'J_cone':>11s} {'delta1':>7s} {'delta2':>7s} ok"
    print(head)
    print("-" * len(head))
    for sid in CATALOGUE:
        sc = make_scenario(sid)
        lte = hc.certify_lte(sc, refine_check=False)
        asym = hc.certify_asymptotics(sc)
        v_lte = "PASS" if lte.passed else "FAIL"
        v_asym = "PASS" if asym.passed else "FAIL"
        ok = v_lte == sc.expected["lte"] and v_asym == sc.expected["asymptotics"]
        d1 = lte.fitted.get("delta1", float("nan"))
        d2 = lte.fitted.get("delta2", float("nan"))
        print(f"{sid:26s} {v_lte:4s} {v_asym:4s} {lte['G_cone'].margin:11.3e} {lte['J_cone'].margin:11.3e} "
              f"{d1:7.4f} {d2:7.4f} {'yes' if ok else 'NO'}")
    for sid in CATALOGUE:
        sc = make_scenario(sid)
        if "R_hat>=-6" in sc.tags:
            low, wit = hc.scalar_lower_bound(sc)
            print(f"{sid}: min sampled R_hat = {low:.10f} at r = {wit[0]:.4g}")


if __name__ == "__main__":
    main()
