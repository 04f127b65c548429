"""Correcting published partial-R2 values of cross-trait risk scores.

Published disorder scores regressed on brain imaging measurements explain
well under 1% of variance, yet the discovery studies used hundreds of
thousands of SNPs against tens of thousands of samples, so heavy
attenuation is expected.  Partial R2 is the squared correlation, so the
correction is the squared attenuation factor:

    r2_corrected = r2_raw * (n1 + p / h2_study) / (n1 * h2_trait)

Three published rows are reproduced below with the tract heritabilities
implied by their corrected values.
"""

from crosstrait import correct_partial_r2

rows = [
    # label, n1, p, h2 of the discovery trait, raw R2, tract h2
    ("ADHD vs PLIC radial diffusivity", 55374, 129052, 0.100, 0.001974, 0.660),
    ("SCZ vs BCC axial diffusivity", 65967, 204367, 0.256, 0.001315, 0.598),
    ("BD vs BCC axial diffusivity", 41653, 215655, 0.205, 0.001092, 0.598),
]

print(f"{'pair':36s} {'raw R2':>9s} {'corrected':>10s} {'factor':>8s}")
for label, n1, p, h2_study, r2, h2_trait in rows:
    res = correct_partial_r2(r2, n1, p, h2_study, h2_trait)
    print(f"{label:36s} {100*res.r2_raw:8.4f}% {100*res.r2_corrected:9.4f}% {res.factor:8.2f}")

print("\nnote the two BCC rows: two different discovery studies against the")
print("same imaging trait imply the same tract heritability (0.598) - the")
print("internal consistency check behind this correction.")
print("\nCLI equivalent:")
print("  crosstrait correct --r2 0.001974 --n1 55374 --p 129052 \\")
print("      --h2a 0.100 --h2e 0.660 --case ae")
