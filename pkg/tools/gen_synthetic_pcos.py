"""Generate the bundled PCOS-style CSV.

The file mirrors the public dataset's shape and texture: 541 rows, 177
positive, the same column names (including the misspellings and stray
spaces of the original export), a blood-group code column, 0/1 symptom
flags, a handful of missing cells, two non-numeric cells inside numeric
columns, and a trailing unnamed column. Feature values are drawn from
class-conditional distributions with a small share of "confusable" rows
so that classifier error rates land in the same range the reference
tables report.

Usage: python tools/gen_synthetic_pcos.py [out.csv]
"""

import csv
import sys

import numpy as np

N_ROWS = 541
N_POS = 177
MASTER_SEED = 20260819

# shares of rows whose feature channels contradict the label (drive the
# error rate and its split between false alarms and misses): "both"
# rows sit in the overlap for every model, "agg" rows mislead only the
# diffuse hormonal drift, "split" rows mislead only the decisive markers
Q_BOTH_NEG, Q_AGG_NEG, Q_SPLIT_NEG = 0.080, 0.095, 0.065
Q_BOTH_POS, Q_AGG_POS, Q_SPLIT_POS = 0.025, 0.055, 0.035

HEADER = [
    "Sl. No",
    "Patient File No.",
    "PCOS (Y/N)",
    " Age (yrs)",
    "Weight (Kg)",
    "Height(Cm) ",
    "BMI",
    "Blood Group",
    "Pulse rate(bpm) ",
    "RR (breaths/min)",
    "Hb(g/dl)",
    "Cycle(R/I)",
    "Cycle length(days)",
    "Marraige Status (Yrs)",
    "Pregnant(Y/N)",
    "No. of aborptions",
    "  I   beta-HCG(mIU/mL)",
    "II    beta-HCG(mIU/mL)",
    "FSH(mIU/mL)",
    "LH(mIU/mL)",
    "FSH/LH",
    "Hip(inch)",
    "Waist(inch)",
    "Waist:Hip Ratio",
    "TSH (mIU/L)",
    "AMH(ng/mL)",
    "PRL(ng/mL)",
    "Vit D3 (ng/mL)",
    "PRG(ng/mL)",
    "RBS(mg/dl)",
    "Weight gain(Y/N)",
    "hair growth(Y/N)",
    "Skin darkening (Y/N)",
    "Hair loss(Y/N)",
    "Pimples(Y/N)",
    "Fast food (Y/N)",
    "Reg.Exercise(Y/N)",
    "BP _Systolic (mmHg)",
    "BP _Diastolic (mmHg)",
    "Follicle No. (L)",
    "Follicle No. (R)",
    "Avg. F size (L) (mm)",
    "Avg. F size (R) (mm)",
    "Endometrium (mm)",
    "",  # trailing unnamed column, every cell empty
]


def lerp(a, b, t):
    return a + (b - a) * t


def main(out_path):
    rng = np.random.default_rng(MASTER_SEED)
    rng_f = np.random.default_rng(MASTER_SEED ^ 0x5EED)

    y = np.zeros(N_ROWS, dtype=int)
    y[:N_POS] = 1
    rng.shuffle(y)

    # two latent intensity channels in [0, 1] describe how "positive" a
    # row's features look: ts drives the few decisive, threshold-friendly
    # markers (follicle counts, key symptom flags), td drives the diffuse
    # hormonal drift spread thinly over many columns. Most rows keep the
    # channels consistent with the label; small shares contradict on one
    # channel only, so different decision styles fail on different rows
    # and combining model opinions can recover what any single one misses.
    t_clean = np.where(y == 1, rng.uniform(0.80, 1.0, N_ROWS), rng.uniform(0.0, 0.25, N_ROWS))
    opposite = np.where(
        y == 1, rng.uniform(0.08, 0.32, N_ROWS), rng.uniform(0.70, 0.95, N_ROWS)
    )
    confusable = np.where(
        y == 1, rng.uniform(0.20, 0.45, N_ROWS), rng.uniform(0.55, 0.80, N_ROWS)
    )
    u = rng.uniform(size=N_ROWS)
    q_both = np.where(y == 1, Q_BOTH_POS, Q_BOTH_NEG)
    q_agg = np.where(y == 1, Q_AGG_POS, Q_AGG_NEG)
    q_split = np.where(y == 1, Q_SPLIT_POS, Q_SPLIT_NEG)
    both_off = u < q_both
    agg_off = (~both_off) & (u < q_both + q_agg)
    split_off = (~both_off) & (~agg_off) & (u < q_both + q_agg + q_split)

    ts = t_clean.copy()
    td = t_clean.copy()
    ts[both_off] = confusable[both_off]
    td[both_off] = confusable[both_off]
    td[agg_off] = opposite[agg_off]
    ts[split_off] = opposite[split_off]
    t_mix = 0.5 * (ts + td)  # default drift for weakly informative columns

    def numeric(mu0, mu1, sd, lo=None, hi=None, dp=1, tv=None):
        tv = t_mix if tv is None else tv
        v = rng_f.normal(lerp(mu0, mu1, tv), sd)
        if lo is not None:
            v = np.maximum(v, lo)
        if hi is not None:
            v = np.minimum(v, hi)
        return np.round(v, dp)

    def flag(p0, p1, tv=None):
        tv = t_mix if tv is None else tv
        return (rng_f.uniform(size=N_ROWS) < lerp(p0, p1, tv)).astype(int)

    age = numeric(31.5, 28.5, 5.4, lo=18, hi=48, dp=0)
    height = np.round(rng_f.normal(156.5, 6.0, N_ROWS), 1)
    weight = numeric(56.0, 66.0, 9.5, lo=38, dp=1, tv=td)
    bmi = np.round(weight / (height / 100.0) ** 2, 2)
    blood_group = rng_f.choice(
        np.arange(11, 19), size=N_ROWS, p=[0.22, 0.10, 0.26, 0.09, 0.18, 0.05, 0.08, 0.02]
    )
    pulse = numeric(72.6, 75.2, 4.2, lo=58, dp=0, tv=td)
    rr = numeric(19.0, 19.5, 2.1, lo=14, dp=0)
    hb = numeric(11.55, 11.15, 0.85, lo=8.5, dp=1, tv=td)
    cycle = np.where(flag(0.20, 0.85, tv=ts) == 1, 4, 2)  # 2 regular, 4 irregular
    cycle_len = numeric(5.4, 4.2, 1.3, lo=2, dp=0, tv=td)
    marriage = numeric(7.5, 6.0, 4.6, lo=0, dp=1)
    pregnant = flag(0.42, 0.30)
    abortions = np.minimum(rng_f.poisson(lerp(0.45, 0.30, t_mix)), 5)
    hcg1 = np.round(np.exp(rng_f.normal(2.7, 1.5, N_ROWS)), 2)
    hcg2 = np.round(np.exp(rng_f.normal(2.9, 1.6, N_ROWS)), 2)
    fsh = numeric(5.9, 5.0, 1.9, lo=0.3, dp=2, tv=td)
    lh = numeric(4.2, 9.6, 2.4, lo=0.2, dp=2, tv=td)
    fsh_lh = np.round(fsh / lh, 2)
    hip = numeric(37.5, 39.5, 3.4, lo=28, dp=0, tv=td)
    waist = np.round(hip * rng_f.normal(lerp(0.855, 0.895, td), 0.035), 0)
    whr = np.round(waist / hip, 2)
    tsh = np.round(np.exp(rng_f.normal(0.8, 0.65, N_ROWS)), 3)
    amh = np.round(np.maximum(rng_f.normal(lerp(2.6, 7.4, td), 1.9), 0.1), 2)
    prl = numeric(21.0, 25.5, 9.0, lo=2, dp=2, tv=td)
    vitd3 = numeric(29.0, 23.0, 12.0, lo=4, dp=1, tv=td)
    prg = np.round(np.exp(rng_f.normal(-0.4, 0.9, N_ROWS)), 2)
    rbs = numeric(95.0, 103.0, 12.0, lo=65, dp=0, tv=td)
    weight_gain = flag(0.15, 0.75, tv=ts)
    hair_growth = flag(0.12, 0.62, tv=td)
    skin_dark = flag(0.13, 0.68, tv=ts)
    hair_loss = flag(0.38, 0.52)
    pimples = flag(0.35, 0.62)
    fast_food = flag(0.38, 0.74, tv=td)
    reg_exercise = flag(0.30, 0.20)
    bp_sys = numeric(112.5, 117.0, 7.5, lo=90, dp=0, tv=td)
    bp_dia = numeric(74.5, 77.5, 5.5, lo=55, dp=0, tv=td)
    foll_l = np.maximum(np.round(rng_f.normal(lerp(4.9, 13.0, ts), 2.6)), 0).astype(int)
    foll_r = np.maximum(np.round(rng_f.normal(lerp(5.3, 13.6, ts), 2.7)), 0).astype(int)
    fsize_l = numeric(14.5, 16.0, 3.2, lo=5, dp=1)
    fsize_r = numeric(14.8, 16.2, 3.2, lo=5, dp=1)
    endo = numeric(8.4, 8.8, 1.8, lo=3, dp=1)

    def fmt(v, dp):
        if dp == 0:
            return str(int(round(float(v))))
        return f"{float(v):.{dp}f}"

    rows = []
    for i in range(N_ROWS):
        rows.append([
            str(i + 1),
            str(10000 + i + 1),
            str(int(y[i])),
            fmt(age[i], 0),
            fmt(weight[i], 1),
            fmt(height[i], 1),
            fmt(bmi[i], 2),
            str(int(blood_group[i])),
            fmt(pulse[i], 0),
            fmt(rr[i], 0),
            fmt(hb[i], 1),
            str(int(cycle[i])),
            fmt(cycle_len[i], 0),
            fmt(marriage[i], 1),
            str(int(pregnant[i])),
            str(int(abortions[i])),
            fmt(hcg1[i], 2),
            fmt(hcg2[i], 2),
            fmt(fsh[i], 2),
            fmt(lh[i], 2),
            fmt(fsh_lh[i], 2),
            fmt(hip[i], 0),
            fmt(waist[i], 0),
            fmt(whr[i], 2),
            fmt(tsh[i], 3),
            fmt(amh[i], 2),
            fmt(prl[i], 2),
            fmt(vitd3[i], 1),
            fmt(prg[i], 2),
            fmt(rbs[i], 0),
            str(int(weight_gain[i])),
            str(int(hair_growth[i])),
            str(int(skin_dark[i])),
            str(int(hair_loss[i])),
            str(int(pimples[i])),
            str(int(fast_food[i])),
            str(int(reg_exercise[i])),
            fmt(bp_sys[i], 0),
            fmt(bp_dia[i], 0),
            str(int(foll_l[i])),
            str(int(foll_r[i])),
            fmt(fsize_l[i], 1),
            fmt(fsize_r[i], 1),
            fmt(endo[i], 1),
            "",
        ])

    # the export's famous warts: junk cells in numeric columns and a few
    # blanks, all of which the loader must turn into missing values
    rows[304][HEADER.index("AMH(ng/mL)")] = "a"
    rows[122][HEADER.index("II    beta-HCG(mIU/mL)")] = "1.99."
    rows[37][HEADER.index("Marraige Status (Yrs)")] = ""
    rows[200][HEADER.index("Fast food (Y/N)")] = ""
    rows[310][HEADER.index("Fast food (Y/N)")] = ""

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(HEADER)
        w.writerows(rows)
    print(f"wrote {out_path}: {N_ROWS} rows, {int(y.sum())} positive")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/stackgen/datasets/pcos_synthetic.csv")
