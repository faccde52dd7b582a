#!/usr/bin/env python3
"""Regenerates data/asphalt_fatigue.csv.

The table mimics a compilation of four-point bending beam fatigue results
from four lab studies: binder content, air voids and strain amplitude vary
per study, loading is 10 Hz throughout, and one source reports temperature
in Fahrenheit (70 F) while its off-temperature series (40 F, 100 F) are
kept in the table so the pipeline's condition screen has something to do.

Fatigue life follows a strain-life power law with study-level offsets and
lognormal test scatter. The embedded search picks the scatter sub-seed so
that the pipeline's two-stage outlier filter (life bounds 2e3..2e6, then
|z| <= 3 on binder/voids/strain/life) retains exactly 206 rows, the
retained set is a fixed point of the filter, and the retained binder range
is exactly [4.0, 6.7].

Deterministic: rerunning reproduces the committed CSV byte for byte.
"""

import math
import os
import sys

import numpy as np

HEADER = ("binder_content,air_voids,strain_microstrain,temperature_c,"
          "frequency_hz,fatigue_life_cycles,source")

NF_LO, NF_HI = 2.0e3, 2.0e6
Z_MAX = 3.0
TARGET_RETAINED = 206
SIGMA_LOG10 = 0.125  # lognormal test scatter, in decades


def life_law(binder, voids, strain, offset):
    """log10 of fatigue life. Strain exponent ~3.7, mild binder curvature."""
    b = binder - 5.0
    return (5.34
            + 0.42 * b - 0.085 * b * b
            - 0.16 * (voids - 5.0)
            - (3.8 - 0.10 * b) * np.log10(strain / 400.0)
            + offset)


def repeat_levels(rng, levels, counts):
    out = []
    for lv, c in zip(levels, counts):
        out.extend([lv] * c)
    return np.array(out, dtype=float)


def gen_study(rng, n, binder_levels, binder_weights, voids_lo, voids_hi,
              strain_levels, strain_counts, offset, temp, source,
              voids_strain_slope=0.0):
    assert sum(strain_counts) == n, (source, sum(strain_counts))
    strain = repeat_levels(rng, strain_levels, strain_counts)
    binder = rng.choice(binder_levels, size=n, p=binder_weights)
    mid = 0.5 * (voids_lo + voids_hi)
    half = 0.5 * (voids_hi - voids_lo)
    # Optional tilt: low-strain specimens lean toward higher voids, which is
    # what keeps part of the low-strain series below the upper life bound.
    tilt = voids_strain_slope * (np.log10(np.median(strain)) - np.log10(strain))
    voids = np.clip(mid + tilt + rng.normal(0.0, 0.55 * half, size=n),
                    voids_lo, voids_hi)
    voids = np.round(voids, 1)
    log_truth = life_law(binder, voids, strain, offset)
    noise = rng.normal(0.0, SIGMA_LOG10, size=n)
    nf = np.rint(10.0 ** (log_truth + noise))
    nf = np.maximum(nf, 100.0)  # a busted gauge never reports < 100 cycles
    rows = []
    for i in range(n):
        rows.append({
            "binder": float(binder[i]),
            "voids": float(voids[i]),
            "strain": float(strain[i]),
            "temp": temp,
            "freq": 10.0,
            "nf": float(nf[i]),
            "truth": float(10.0 ** log_truth[i]),
            "source": source,
        })
    return rows


def generate(subseed):
    rng = np.random.default_rng(900_000 + subseed)
    rows = []

    # Study A: coarse strain sweep, wide binder range. Carries the 4.0 %
    # binder anchor of the compiled table.
    rows += gen_study(
        rng, 22,
        binder_levels=[4.0, 4.5, 5.0, 5.5, 6.0],
        binder_weights=[0.24, 0.19, 0.19, 0.19, 0.19],
        voids_lo=1.3, voids_hi=7.7,
        strain_levels=[500, 600, 700, 850, 1000],
        strain_counts=[5, 5, 4, 4, 4],
        offset=0.05, temp="20", source="lab_a")

    # Study B: three temperature series, Fahrenheit column. Only the
    # 70 F series matches the modeling conditions.
    for temp, n in (("70", 77), ("40", 76), ("100", 76)):
        counts = [11, 11, 11, 11, 11, 11, 11] if n == 77 else [11, 11, 11, 11, 11, 11, 10]
        rows += gen_study(
            rng, n,
            binder_levels=[4.2, 4.7, 5.2],
            binder_weights=[0.34, 0.33, 0.33],
            voids_lo=4.0, voids_hi=10.8,
            strain_levels=[137, 150, 170, 200, 230, 265, 300],
            strain_counts=counts,
            offset=-0.05, temp=temp, source="lab_b",
            voids_strain_slope=6.6)

    # Study C: widest voids and strain coverage, binder-rich mixes.
    rows += gen_study(
        rng, 115,
        binder_levels=[4.7, 5.0, 5.4, 5.8, 6.1, 6.5],
        binder_weights=[0.10, 0.12, 0.16, 0.20, 0.20, 0.22],
        voids_lo=1.2, voids_hi=12.8,
        strain_levels=[115, 140, 170, 200, 250, 300, 400, 550, 700, 800],
        strain_counts=[9, 11, 12, 12, 13, 13, 12, 11, 11, 11],
        offset=0.06, temp="20", source="lab_c",
        voids_strain_slope=7.6)

    # Study D: dense mixes near 4 % voids, short lives, high strains.
    # Carries the 6.7 % binder anchor.
    rows += gen_study(
        rng, 38,
        binder_levels=[4.7, 5.1, 5.5, 6.2, 6.7],
        binder_weights=[0.20, 0.18, 0.18, 0.20, 0.24],
        voids_lo=4.0, voids_hi=4.1,
        strain_levels=[400, 500, 600, 700, 850, 1000],
        strain_counts=[5, 6, 6, 6, 7, 8],
        offset=-0.45, temp="20", source="lab_d")

    # A few hand-placed oddballs, the kind every compiled table carries.
    # Four premature failures in the high-strain study D series:
    for i, (binder, nf) in enumerate([(4.7, 980.0), (4.7, 1240.0),
                                      (5.1, 1610.0), (5.1, 1890.0)]):
        rows[396 + i]["binder"] = binder
        rows[396 + i]["nf"] = nf
    # One digit-slip typo (4.7 entered as 47) with an otherwise ordinary
    # life, so it clears the life bounds and falls to the z-score stage:
    rows[60].update(binder=47.0, nf=412000.0)
    return rows


def eligible_rows(rows):
    """Mirror of the pipeline's fixed-condition screen."""
    out = []
    for r in rows:
        t = 21.1 if r["temp"] == "70" else float(r["temp"])
        if (abs(t - 20.0) < 1e-9 or abs(t - 21.1) < 1e-9) and r["freq"] == 10.0:
            out.append(r)
    return out


def apply_filter(rows):
    """Mirror of the pipeline's two-stage outlier filter."""
    stage1 = [r for r in rows if NF_LO <= r["nf"] <= NF_HI]
    cols = np.array([[r["binder"], r["voids"], r["strain"], r["nf"]]
                     for r in stage1])
    mean = cols.mean(axis=0)
    std = cols.std(axis=0)  # population convention, like the pipeline
    z = np.abs((cols - mean) / std)
    retained = [r for r, zi in zip(stage1, z) if (zi <= Z_MAX).all()]
    return stage1, retained, z


def r_squared(y, yhat):
    y = np.asarray(y)
    yhat = np.asarray(yhat)
    ss_res = float(((y - yhat) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - ss_res / ss_tot


GATES = ["count", "composition", "binder", "strain", "z-margin", "fixed-point",
         "ceiling"]


def check(subseed, gate_hits=None):
    def fail(gate):
        if gate_hits is not None:
            gate_hits[gate] = gate_hits.get(gate, 0) + 1
        return None

    rows = generate(subseed)
    elig = eligible_rows(rows)
    stage1, retained, z = apply_filter(elig)
    n = len(retained)
    n_below = sum(1 for r in elig if r["nf"] < NF_LO)
    n_stage2 = len(stage1) - n
    if n != TARGET_RETAINED:
        return fail("count")
    # Both filter stages should visibly bite on the shipped table.
    if n_below < 4 or n_stage2 < 1:
        return fail("composition")
    binders = [r["binder"] for r in retained]
    strains = [r["strain"] for r in retained]
    if min(binders) != 4.0 or max(binders) != 6.7:
        return fail("binder")
    if min(strains) >= 200.0 or max(strains) <= 400.0:
        return fail("strain")
    # No z-score close to the threshold: the C++ pass must agree bit-for-bit
    # in effect despite a different summation order.
    zmax_per_row = z.max(axis=1)
    if np.any((zmax_per_row > Z_MAX - 0.03) & (zmax_per_row < Z_MAX + 0.03)):
        return fail("z-margin")
    # Fixed point: filtering the retained set must reject nothing.
    _, re_retained, z2 = apply_filter(retained)
    if len(re_retained) != n or z2.max() > Z_MAX - 0.03:
        return fail("fixed-point")
    # Noise ceiling: R2 of the noiseless law against the noisy lives, i.e.
    # what a perfect regressor could score. Keep it in a narrow band so the
    # trained networks land inside their expected range.
    ceiling = r_squared([r["nf"] for r in retained],
                        [r["truth"] for r in retained])
    if not (0.885 <= ceiling <= 0.945):
        return fail("ceiling")
    return rows, retained, ceiling


def fmt(v):
    if v == int(v):
        return str(int(v))
    return f"{v:g}"


def main():
    found = None
    gate_hits = {}
    for subseed in range(20000):
        res = check(subseed, gate_hits)
        if res is not None:
            found = (subseed, res)
            break
    if found is None:
        print("no subseed satisfied every constraint; rejections per gate:")
        for g in GATES:
            print(f"  {g}: {gate_hits.get(g, 0)}")
        sys.exit(1)

    subseed, (rows, retained, ceiling) = found
    out_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                           os.pardir, "data")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "asphalt_fatigue.csv")
    with open(path, "w") as f:
        f.write(HEADER + "\n")
        for r in rows:
            f.write(f'{fmt(r["binder"])},{fmt(r["voids"])},{fmt(r["strain"])},'
                    f'{r["temp"]},{fmt(r["freq"])},{fmt(r["nf"])},{r["source"]}\n')

    elig = eligible_rows(rows)
    stage1 = [r for r in elig if NF_LO <= r["nf"] <= NF_HI]
    strains = sorted({r["strain"] for r in retained})
    print(f"subseed {subseed}: wrote {len(rows)} rows -> {path}")
    print(f"retained {len(retained)}, noise ceiling R2 {ceiling:.4f}")
    print(f"rejects: {sum(1 for r in elig if r['nf'] < NF_LO)} below, "
          f"{sum(1 for r in elig if r['nf'] > NF_HI)} above, "
          f"{len(stage1) - len(retained)} z-score")
    print(f"retained binder [{min(r['binder'] for r in retained)}, "
          f"{max(r['binder'] for r in retained)}], "
          f"strain [{min(strains)}, {max(strains)}]")


if __name__ == "__main__":
    main()
