#!/usr/bin/env python3
"""Writes the synthetic GDSC-shaped fixture under data/fixture/.

The table is the full 40 drug x 25 cell-line grid for LUAD (1000 rows).
Exactly 347 rows fall below ln(IC50) = -2, three rows sit exactly on the
threshold. 25 drugs carry SMILES and 15 cell lines carry mutations, so the
ablation variants have 625, 600 and 375 rows.
"""

import csv
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixture"

DRUGS = [
    # name, putative target, smiles (None: no structure on file)
    ("PCI-34051", "HDAC1", "COC1=CC=C(C=C1)CN2C=CC3=C2C=C(C=C3)C(=O)NO"),
    ("Cisplatin", "DNA crosslinker", "N.N.Cl[Pt]Cl"),
    ("Gefitinib", "EGFR", "COC1=C(C=C2C(=C1)N=CN=C2NC3=CC(=C(C=C3)F)Cl)OCCCN4CCOCC4"),
    ("Erlotinib", "EGFR", "COCCOC1=C(C=C2C(=C1)C(=NC=N2)NC3=CC=CC(=C3)C#C)OCCOC"),
    ("Afatinib", "EGFR, ERBB2", "CN(C)C/C=C/C(=O)NC1=C(C=C2C(=C1)C(=NC=N2)NC3=CC(=C(C=C3)F)Cl)OC4CCOC4"),
    ("Osimertinib", "EGFR", "CN1C=C(C2=CC=CC=C21)C3=NC(=NC=C3)NC4=C(C=C(C(=C4)NC(=O)C=C)N(C)CCN(C)C)OC"),
    ("Crizotinib", "MET, ALK, ROS1", "CC(C1=C(C=CC(=C1Cl)F)Cl)OC2=C(N=CC(=C2)C3=CN(N=C3)C4CCNCC4)N"),
    ("Paclitaxel", "Microtubule stabiliser", "CC1=C2C(C(=O)C3(C(CC4C(C3C(C(C2(C)C)(CC1OC(=O)C(C(C5=CC=CC=C5)NC(=O)C6=CC=CC=C6)O)O)OC(=O)C7=CC=CC=C7)(CO4)OC(=O)C)O)C)OC(=O)C"),
    ("Docetaxel", "Microtubule stabiliser", None),
    ("Gemcitabine", "Pyrimidine antimetabolite", "C1=CN(C(=O)N=C1N)C2C(C(C(O2)CO)O)(F)F"),
    ("Vinorelbine", "Microtubule destabiliser", None),
    ("Etoposide", "TOP2", "CC1OCC2C(O1)C(C(C(O2)OC3C4COC(=O)C4C(C5=CC6=C(C=C35)OCO6)C7=CC(=C(C(=C7)OC)O)OC)O)O"),
    ("Olaparib", "PARP1, PARP2", "C1CC1C(=O)N2CCN(CC2)C(=O)C3=C(C=CC(=C3)CC4=NNC(=O)C5=CC=CC=C54)F"),
    ("Trametinib", "MEK1, MEK2", "CC1=C2C(=C(N(C1=O)C)NC3=C(C=C(C=C3)I)F)C(=O)N(C(=O)N2C4=CC=CC(=C4)NC(=O)C)C5CC5"),
    ("Selumetinib", "MEK1, MEK2", "CN1C=NC2=C1C=C(C(=C2F)NC3=C(C=C(C=C3)Br)Cl)C(=O)NOCCO"),
    ("Dabrafenib", "BRAF", "CC(C)(C)C1=NC(=C(S1)C2=NC(=NC=C2)N)C3=C(C(=CC=C3)NS(=O)(=O)C4=C(C=CC=C4F)F)F"),
    ("Vorinostat", "HDAC inhibitor Class I, IIa, IIb, IV", "C1=CC=C(C=C1)NC(=O)CCCCCCC(=O)NO"),
    ("Entinostat", "HDAC1, HDAC3", None),
    ("Bortezomib", "Proteasome", "B(C(CC(C)C)NC(=O)C(CC1=CC=CC=C1)NC(=O)C2=NC=CN=C2)(O)O"),
    ("Dasatinib", "ABL, SRC, Ephrins, PDGFR, KIT", "CC1=C(C(=CC=C1)Cl)NC(=O)C2=CN=C(S2)NC3=CC(=NC(=N3)C)N4CCN(CC4)CCO"),
    ("Sorafenib", "PDGFR, KIT, VEGFR, RAF", "CNC(=O)C1=NC=CC(=C1)OC2=CC=C(C=C2)NC(=O)NC3=CC(=C(C=C3)Cl)C(F)(F)F"),
    ("Lapatinib", "ERBB2, EGFR", None),
    ("Nutlin-3a", "MDM2", None),
    ("AZD7762", "CHEK1, CHEK2", None),
    ("Alpelisib", "PI3Ka", "CC(C)(C1=NC(=CS1)C2=C(N=C(S2)NC(=O)N3CCCC3C(=O)N)C)C(F)(F)F"),
    ("Pictilisib", "PI3K (class 1)", None),
    ("Temozolomide", "DNA alkylating agent", "CN1C(=O)N2C=NC(=C2N=N1)C(=O)N"),
    ("5-Fluorouracil", "Antimetabolite", "C1=C(C(=O)NC(=O)N1)F"),
    ("Oxaliplatin", "DNA alkylating agent", None),
    ("Irinotecan", "TOP1", None),
    ("Topotecan", "TOP1", "CCC1(C2=C(COC1=O)C(=O)N3CC4=CC5=C(C=CC(=C5CN(C)C)O)N=C4C3=C2)O"),
    ("Navitoclax", "BCL2, BCL-XL, BCL-W", None),
    ("Venetoclax", "BCL2", None),
    ("Staurosporine", "Broad spectrum kinase inhibitor", None),
    ("Luminespib", "HSP90", "CCNC(=O)C1=NOC(=C1C2=CC=C(C=C2)CN3CCOCC3)C4=CC(=C(C=C4O)O)C(C)C"),
    ("Tozasertib", "AURKA, AURKB, AURKC", "CC1=CC(=NN1)NC2=NC(=NC(=C2)N3CCN(CC3)C)SC4=CC=C(C=C4)NC(=O)C5CC5"),
    ("Alisertib", "AURKA", None),
    ("Wee1 Inhibitor", "WEE1, CHEK1", None),
    ("JQ1", "BRD2, BRD3, BRD4, BRDT", "CC1=C(SC2=C1C(=NC(C3=NN=C(N32)C)CC(=O)OC(C)(C)C)C4=CC=C(C=C4)Cl)C"),
    ("Ulixertinib", "ERK1, ERK2", None),
]

CELL_LINES = [
    # name, mutated genes (empty: no mutation calls on file)
    ("NCI-H1299", ["CREBBP"]),
    ("A549", ["KRAS", "STK11", "KEAP1"]),
    ("NCI-H1975", ["EGFR", "TP53", "PIK3CA"]),
    ("Calu-3", ["ERBB2", "TP53"]),
    ("HCC827", ["EGFR"]),
    ("PC-14", ["EGFR", "TP53"]),
    ("NCI-H2228", ["TP53", "TP53"]),
    ("NCI-H358", ["KRAS"]),
    ("NCI-H23", ["KRAS", "STK11", "TP53"]),
    ("HCC4006", ["EGFR"]),
    ("NCI-H1650", ["EGFR", "CREBBP"]),
    ("NCI-H1781", ["ERBB2"]),
    ("NCI-H2009", ["KRAS", "TP53"]),
    ("NCI-H2030", ["KRAS", "STK11"]),
    ("NCI-H2087", ["NRAS", "BRAF", "TP53"]),
    ("NCI-H2122", []),
    ("NCI-H2291", []),
    ("NCI-H322M", []),
    ("NCI-H441", []),
    ("NCI-H522", []),
    ("NCI-H650", []),
    ("NCI-H1437", []),
    ("NCI-H1563", []),
    ("NCI-H1568", []),
    ("NCI-H1792", []),
]

SENSITIVE_ROWS = 347
BOUNDARY_ROWS = 3


def main() -> None:
    rng = random.Random(20230601)
    ROOT.mkdir(parents=True, exist_ok=True)

    grid = [(d, c) for d in DRUGS for c in CELL_LINES]
    order = list(range(len(grid)))
    rng.shuffle(order)
    sensitive = set(order[:SENSITIVE_ROWS])
    boundary = set(order[SENSITIVE_ROWS:SENSITIVE_ROWS + BOUNDARY_ROWS])

    with open(ROOT / "pairs.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["DATASET", "DRUG_NAME", "PUTATIVE_TARGET", "CELL_LINE_NAME",
                    "TCGA_DESC", "LN_IC50"])
        for i, ((drug, target, _), (cell, _)) in enumerate(grid):
            if i in sensitive:
                value = round(rng.uniform(-7.5, -2.01), 6)
            elif i in boundary:
                value = -2.0
            else:
                value = round(rng.uniform(-2.0, 6.0), 6)
                if value == -2.0:
                    value = -1.999999
            # A handful of rows arrive without a target annotation.
            shown_target = "" if i % 97 == 13 else target
            w.writerow(["GDSC2", drug, shown_target, cell, "LUAD", f"{value:.6f}"])

    with open(ROOT / "smiles.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["drug_name", "smiles"])
        for drug, _, smiles in DRUGS:
            if smiles:
                w.writerow([drug, smiles])

    with open(ROOT / "mutations.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["cell_line", "gene"])
        for cell, genes in CELL_LINES:
            for gene in genes:
                w.writerow([cell, gene])


if __name__ == "__main__":
    main()
