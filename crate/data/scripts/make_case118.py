"""Writes data/cases/ieee118.case from the IEEE 118-bus data shipped with PYPOWER.

Changes from the source data:
  * the thermal units at buses 69, 89 and 10 become wind sites wy_a, wy_b
    and ca with the units' former P_max as nameplate;
  * branch susceptance is 1/x; source ratings of 9900 MW mean "unlimited"
    and are written as inf;
  * gencost (c2, c1, c0) maps to (c, b, a); P_min stays at the source value;
  * ramp-up/down limits are 50% of P_max per hour and startup/shutdown
    limits equal P_max (all units are committed, so the latter never bind);
  * bus loads follow the 24-hour PROFILE below, peaking at the source PD.

Usage: python3 make_case118.py > ../cases/ieee118.case
"""

from pypower.case118 import case118

PROFILE = [
    0.70, 0.66, 0.64, 0.63, 0.64, 0.68, 0.76, 0.86, 0.94, 0.98, 1.00, 1.00,
    0.99, 0.98, 0.97, 0.97, 0.98, 1.00, 0.99, 0.95, 0.90, 0.84, 0.78, 0.73,
]
WIND = {69: "wy_a", 89: "wy_b", 10: "ca"}


def num(x):
    x = float(x)
    return repr(int(x)) if x == int(x) else repr(x)


def main():
    ppc = case118()
    out = [
        "# IEEE 118-bus system with wind at buses 69, 89 and 10.",
        "# Generated by data/scripts/make_case118.py; edit the script, not this file.",
        "CASE",
        "name          ieee118",
        "periods       24",
        f"base_mva      {num(ppc['baseMVA'])}",
        "shed_penalty  5000",
        "",
        "PROFILE",
        " ".join(num(p) for p in PROFILE),
        "",
        "BUS     # id base_load",
    ]
    for b in ppc["bus"]:
        out.append(f"{int(b[0])} {num(b[2])}")
    out += ["", "BRANCH  # from to susceptance flow_min flow_max"]
    for br in ppc["branch"]:
        rate = float(br[5])
        lim = "inf" if rate == 0 or rate >= 9900 else num(rate)
        neg = "-inf" if lim == "inf" else "-" + lim
        out.append(f"{int(br[0])} {int(br[1])} {num(1.0 / br[3])} {neg} {lim}")
    out += ["", "GEN     # id bus p_min p_max a b c ramp_up ramp_down startup shutdown"]
    sites = []
    for k, (g, c) in enumerate(zip(ppc["gen"], ppc["gencost"]), start=1):
        bus = int(g[0])
        pmax, pmin = float(g[8]), float(g[9])
        if bus in WIND:
            sites.append((WIND[bus], bus, pmax))
            continue
        c2, c1, c0 = c[4], c[5], c[6]
        ramp = 0.5 * pmax
        out.append(
            f"{k} {bus} {num(pmin)} {num(pmax)} {num(c0)} {num(c1)} {num(c2)} "
            f"{num(ramp)} {num(ramp)} {num(pmax)} {num(pmax)}"
        )
    out += ["", "RENEWABLE  # label bus nameplate curve"]
    for label in ["wy_a", "wy_b", "ca"]:
        _, bus, cap = next(s for s in sites if s[0] == label)
        out.append(f"{label} {bus} {num(cap)} default")
    print("\n".join(out))


if __name__ == "__main__":
    main()
