"""Hand-sized walkthrough of the evaluation metrics.

Covering rewards getting the segmentation right; margin-based F1 rewards
locating the change indices. The examples below pull the two apart: a
prediction can segment well while missing every index tolerance, and
vice versa.
"""

from watchcpd import (
    AnnotationSet,
    covering,
    f1,
    jaccard,
    partition_from_changepoints,
    precision_recall,
)


def show(label, pred, truth, margin):
    prec, rec = precision_recall(pred, truth, margin)
    cov = covering(partition_from_changepoints(pred, truth.series_length), truth)
    print(f"{label:32s} cover={cov:.4f}  P={prec:.3f} R={rec:.3f} F1={f1(prec, rec):.3f}")


def main() -> None:
    print("jaccard([0,50), [0,60)) =", round(jaccard((0, 50), (0, 60)), 4))
    print("jaccard([50,100), [60,100)) =", round(jaccard((50, 100), (60, 100)), 4))
    print()

    truth = AnnotationSet.single((50,), 100)
    print("truth: one change at 50 in a length-100 series, margin 5")
    show("  exact prediction {50}", [50], truth, 5)
    show("  close prediction {53}", [53], truth, 5)
    show("  off-by-ten {60}", [60], truth, 5)
    show("  empty prediction", [], truth, 5)
    show("  spray {10,30,50,70,90}", [10, 30, 50, 70, 90], truth, 5)
    print()
    print("{60} keeps a decent covering score but fails the margin;")
    print("the spray nails recall yet pays for it in precision.")
    print()

    # index 0 is matched implicitly, so the empty prediction is not zero
    print("empty vs empty truth:")
    empty = AnnotationSet.single((), 100)
    show("  empty prediction", [], empty, 5)
    print()

    # disagreeing annotators: recall averages over them
    multi = AnnotationSet(
        {"a": (50,), "b": (50, 75), "c": (48,)}, series_length=100
    )
    print("three annotators {50}, {50,75}, {48}, margin 5:")
    show("  prediction {50}", [50], multi, 5)
    show("  prediction {50, 75}", [50, 75], multi, 5)


if __name__ == "__main__":
    main()
