"""Label every complete catalog scenario from its curvature scale."""

from warpflow import ansatz
from warpflow.classify import classify_scenario

if __name__ == "__main__":
    for name in ansatz.catalog_names():
        sc = ansatz.catalog(name)
        if not sc.complete:
            print(f"{name:22s} skipped (incomplete)")
            continue
        res = classify_scenario(sc)
        print(f"{name:22s} {res.label.value:9s} exponent={res.exponent:+.4f} expected={sc.expected_class}")
