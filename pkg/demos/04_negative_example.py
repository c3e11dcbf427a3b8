"""A concave warping function: the certificate fails and the monitors stand down.

lambda(r) = 2 sqrt(1 + r) is increasing but strictly concave, so the G
field points against eta and the lower bound on H has no support. The flow
itself still runs; every bound that needs the failed hypothesis is
reported as skipped instead of being asserted.
"""

from imcf_lab import flow_engine as fe
from imcf_lab import hypothesis_certifier as hc
from imcf_lab import monitors as mon
from imcf_lab.scenarios import make_scenario


def main():
    sc = make_scenario("example2_negative", {"amplitude": 0.05})
    lte = hc.certify_lte(sc)
    print(lte.to_text(), end="")
    g = lte["G_cone"]
    print(f"\nG_cone fails first at r = {g.witness[0]:.4g} with margin {g.margin:.4e}\n")
    traj = fe.run(sc, fe.initial_state(sc, "axisym", 64), 1.0, certificate=lte)
    print(f"run tagged lte_certificate={traj.tags['lte_certificate']}, H_min(T) = {traj['H_min'][-1]:.5f}")
    params = mon.EnvelopeParams.from_certificates(sc, traj, lte, hc.certify_asymptotics(sc))
    print(mon.run_monitors(traj, params, sc).to_text(), end="")


if __name__ == "__main__":
    main()
